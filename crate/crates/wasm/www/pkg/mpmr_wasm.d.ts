/* tslint:disable */
/* eslint-disable */

/**
 * ESS for `offers` with `responders` responders. Returns `3K + 1` values:
 * the visit probabilities, the proposer payoffs, the responder payoffs
 * (one per proposer, as seen by a responder visiting it), and
 * the common responder payoff.
 */
export function ess_explore(offers: Float64Array, responders: number): Float64Array;

/**
 * Limit curves over `steps` ratios between `c_min` and `c_max`
 * (geometric spacing). Returns `4` values per ratio: `c`, offer,
 * proposer payoff, responder payoff.
 */
export function limit_curve(c_min: number, c_max: number, steps: number): Float64Array;

/**
 * Replicator field on a lattice with `resolution` points per edge.
 * Returns `6` values per point: `x1, x2, x3, dx1, dx2, dx3`.
 */
export function replicator_field(s: number, delta: number, resolution: number): Float64Array;

/**
 * Trajectory from `(x1, x2, 1 - x1 - x2)`, sampled `samples` times.
 * Returns `3` values per sample followed by the final distance to the
 * equilibrium line.
 */
export function replicator_trajectory(s: number, delta: number, x1: number, x2: number, t_end: number, samples: number): Float64Array;

/**
 * Symmetric offers for `K = 2..=k_max` at fixed `responders`.
 */
export function spne_curve(k_max: number, responders: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly ess_explore: (a: number, b: number, c: number) => [number, number, number, number];
    readonly limit_curve: (a: number, b: number, c: number) => [number, number, number, number];
    readonly replicator_field: (a: number, b: number, c: number) => [number, number, number, number];
    readonly replicator_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
    readonly spne_curve: (a: number, b: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
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
