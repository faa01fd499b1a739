/* tslint:disable */
/* eslint-disable */

/**
 * Per-epoch objective gaps of each solver, against a batch reference.
 */
export class Race {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    gaps(k: number): Float64Array;
    name(k: number): string;
    passes(k: number): Float64Array;
    solver_count(): number;
}

/**
 * `ρ(θ)` sampled on a grid, with the optimal weight and its step size.
 */
export class RateCurve {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly beta_star: number;
    readonly eta_star: number;
    readonly m: number;
    readonly rhos: Float64Array;
    readonly theta_star: number;
    readonly thetas: Float64Array;
}

/**
 * Runs the three stochastic solvers for `epochs` epochs with step
 * `eta_scale / L` (the VR solvers) and `4·eta_scale / L` (STOC-ADMM).
 */
export function race(n: number, d: number, seed: bigint, epochs: number, lambda1: number, eta_scale: number): Race;

/**
 * Rate curve for condition numbers `kappa = L/μ` and `omega = ‖AᵀA‖/σ_min`
 * with `n` samples, batch size `b` and epoch length `m` (0 picks the
 * smallest admissible length, doubled).
 */
export function rate_curve(kappa: number, omega: number, n: number, b: number, m: number, points: number): RateCurve;

/**
 * `θ₀, θ₁, …, θ_steps` of the decaying recursion.
 */
export function theta_schedule(theta0: number, steps: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_race_free: (a: number, b: number) => void;
    readonly __wbg_ratecurve_free: (a: number, b: number) => void;
    readonly race: (a: number, b: number, c: bigint, d: number, e: number, f: number) => [number, number, number];
    readonly race_gaps: (a: number, b: number) => [number, number];
    readonly race_name: (a: number, b: number) => [number, number];
    readonly race_passes: (a: number, b: number) => [number, number];
    readonly race_solver_count: (a: number) => number;
    readonly rate_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly ratecurve_beta_star: (a: number) => number;
    readonly ratecurve_eta_star: (a: number) => number;
    readonly ratecurve_m: (a: number) => number;
    readonly ratecurve_rhos: (a: number) => [number, number];
    readonly ratecurve_theta_star: (a: number) => number;
    readonly ratecurve_thetas: (a: number) => [number, number];
    readonly theta_schedule: (a: number, b: number) => [number, number, number, number];
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
