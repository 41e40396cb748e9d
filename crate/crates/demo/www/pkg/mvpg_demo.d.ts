/* tslint:disable */
/* eslint-disable */

/**
 * Probability of the deterministic arm of the equal-mean bandit along a
 * training run, sampled at `points` evenly spaced episodes. λ = 0 trains
 * the risk-neutral baseline.
 */
export function bandit_curve(lambda: number, episodes: number, seed: number, points: number): Float64Array;

/**
 * Finite-sample bound for a constant stepsize with two blocks.
 */
export function gradient_bound(lipschitz: number, grad_bound: number, noise: number, bias: number, beta: number, episodes: number, f_gap: number): number;

/**
 * Trains on the option (MVP at `lambda`, or the baseline when λ = 0) and
 * returns `eval` evaluation returns of the trained policy.
 */
export function option_returns(lambda: number, episodes: number, seed: number, _eval: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bandit_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly gradient_bound: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly option_returns: (a: number, b: number, c: number, d: number) => [number, number, number, number];
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
