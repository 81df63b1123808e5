/* tslint:disable */
/* eslint-disable */

/**
 * First `n_terms` PD(α, θ) weights in size-biased stick-breaking order.
 */
export function pd_sticks(alpha: number, theta: number, n_terms: number, seed: bigint): Float64Array;

/**
 * One draw on `[0, 1]` as `[x₀, z₀, x₁, z₁, …]`, sorted by location.
 * `model` is `"gamma"` or `"stable"`; `alpha` is ignored for gamma.
 */
export function process_draw(model: string, theta: number, alpha: number, max_atoms: number, seed: bigint): Float64Array;

/**
 * Laplace functional at `a ≡ level` of the scaled tilted stable process
 * against the gamma limit. Rows of five: `[α, analytic, monte carlo, se,
 * gamma]`; `n = 0` skips the Monte Carlo column (NaN).
 */
export function weak_limit_curve(theta: number, k: number, level: number, alphas: Float64Array, n: number, seed: bigint): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly pd_sticks: (a: number, b: number, c: number, d: bigint) => [number, number, number, number];
    readonly process_draw: (a: number, b: number, c: number, d: number, e: number, f: bigint) => [number, number, number, number];
    readonly weak_limit_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: bigint) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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
