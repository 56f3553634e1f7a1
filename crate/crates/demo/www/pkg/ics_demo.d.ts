/* tslint:disable */
/* eslint-disable */

/**
 * `[w₁(0..=n), bound(0..=n), λ_emp, C, λ]` for the Diracs at `x` and `y`.
 */
export function contraction_curve(amplitude: number, x: number, y: number, n: number): Float64Array;

/**
 * `[ρ, h(0), h(1/n), …, h((n−1)/n)]`.
 */
export function eigenfunction(amplitude: number, n: number): Float64Array;

/**
 * Gibbs-measure mass per bin of `[0,1)`, followed by the iteration count.
 */
export function gibbs_histogram(amplitude: number, bins: number, tol: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly contraction_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly eigenfunction: (a: number, b: number) => [number, number, number, number];
    readonly gibbs_histogram: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;
