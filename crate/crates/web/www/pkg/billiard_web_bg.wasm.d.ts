/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_cavity_free: (a: number, b: number) => void;
export const barrier_curves: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
export const cavity_bounds: (a: number) => [number, number];
export const cavity_conductance: (a: number, b: number, c: number, d: number) => [number, number];
export const cavity_darmstadt: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const cavity_energies: (a: number) => [number, number];
export const cavity_mode_image: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const cavity_rectangle: (a: number, b: number, c: number, d: number, e: number) => [number, number, number];
export const cavity_trusted_k_max: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
