/* tslint:disable */
/* eslint-disable */

/**
 * Flattened `(k_max + 2) x n` matrix: density row, then `phi_0 .. phi_kmax`.
 */
export function basisCurves(mu: number, k_max: number, lo: number, hi: number, n: number): Float64Array;

/**
 * Flattened `k1, k2, k1, k2, ...`.
 */
export function indexSet(kind: string, deg: number): Uint32Array;

/**
 * `[mse_max, mse_av, x_0..x_{n-1}, estimate.., exact..]`.
 */
export function solveCurve(q: number, k: number, paths: number, steps: number, seed: number, n: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly basisCurves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly indexSet: (a: number, b: number, c: number) => [number, number, number, number];
    readonly solveCurve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
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
