/* tslint:disable */
/* eslint-disable */

export class Cavity {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * `[x_min, x_max, y_min, y_max]` of the cavity.
     */
    bounds(): Float64Array;
    /**
     * Flattened `[k, T]` pairs over a uniform grid in units of `π/w`; T is NaN where skipped.
     */
    conductance(k_min: number, k_max: number, points: number): Float64Array;
    /**
     * Gaussian-over-parabola cavity; `k_keep` is clamped to the basis size.
     */
    static darmstadt(alpha: number, beta: number, gamma: number, lambda: number, m_max: number, n_max: number, k_keep: number): Cavity;
    energies(): Float64Array;
    /**
     * Eigenfunction `state` on an `nx × ny` grid over [`Cavity::bounds`], row-major from the
     * top row; NaN outside the walls.
     */
    mode_image(state: number, nx: number, ny: number): Float64Array;
    static rectangle(height: number, length: number, m_max: number, n_max: number, k_keep: number): Cavity;
    /**
     * Largest `k` (units of `π/w`) the retained spectrum resolves.
     */
    trusted_k_max(): number;
}

/**
 * Flattened `[E, T_exact, T_rmatrix]` triples; the R-matrix value is NaN at skipped poles.
 */
export function barrier_curves(v0: number, m_trunc: number, e_min: number, e_max: number, points: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_cavity_free: (a: number, b: number) => void;
    readonly barrier_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly cavity_bounds: (a: number) => [number, number];
    readonly cavity_conductance: (a: number, b: number, c: number, d: number) => [number, number];
    readonly cavity_darmstadt: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly cavity_energies: (a: number) => [number, number];
    readonly cavity_mode_image: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly cavity_rectangle: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
    readonly cavity_trusted_k_max: (a: number) => number;
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
