/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_curveview_free: (a: number, b: number) => void;
export const __wbg_mapview_free: (a: number, b: number) => void;
export const __wbg_sidebandview_free: (a: number, b: number) => void;
export const anticrossing: (a: number, b: number, c: number, d: number) => [number, number, number];
export const curveview_sensitivity: (a: number) => [number, number];
export const curveview_x: (a: number) => [number, number];
export const mapview_fields_t: (a: number) => [number, number];
export const mapview_frequencies_hz: (a: number) => [number, number];
export const mapview_magnitude_db: (a: number) => [number, number];
export const sensitivity_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
export const sidebands: (a: number, b: number, c: number, d: number) => [number, number, number];
export const sidebandview_modulation_hz: (a: number) => number;
export const sidebandview_offsets_hz: (a: number) => [number, number];
export const sidebandview_power_dbc: (a: number) => [number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;
