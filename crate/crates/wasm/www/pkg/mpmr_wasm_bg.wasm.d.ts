/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const ess_explore: (a: number, b: number, c: number) => [number, number, number, number];
export const limit_curve: (a: number, b: number, c: number) => [number, number, number, number];
export const replicator_field: (a: number, b: number, c: number) => [number, number, number, number];
export const replicator_trajectory: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number, number];
export const spne_curve: (a: number, b: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_start: () => void;
