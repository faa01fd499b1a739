/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_race_free: (a: number, b: number) => void;
export const __wbg_ratecurve_free: (a: number, b: number) => void;
export const race: (a: number, b: number, c: bigint, d: number, e: number, f: number) => [number, number, number];
export const race_gaps: (a: number, b: number) => [number, number];
export const race_name: (a: number, b: number) => [number, number];
export const race_passes: (a: number, b: number) => [number, number];
export const race_solver_count: (a: number) => number;
export const rate_curve: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const ratecurve_beta_star: (a: number) => number;
export const ratecurve_eta_star: (a: number) => number;
export const ratecurve_m: (a: number) => number;
export const ratecurve_rhos: (a: number) => [number, number];
export const ratecurve_theta_star: (a: number) => number;
export const ratecurve_thetas: (a: number) => [number, number];
export const theta_schedule: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
