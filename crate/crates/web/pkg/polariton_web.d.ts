/* tslint:disable */
/* eslint-disable */

/**
 * Sensitivity (T/√Hz) against the swept input.
 */
export class CurveView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly sensitivity: Float64Array;
    readonly x: Float64Array;
}

/**
 * |S21| in dB on a `points` × `points` grid, field-major.
 */
export class MapView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly fields_t: Float64Array;
    readonly frequencies_hz: Float64Array;
    readonly magnitude_db: Float64Array;
}

/**
 * Sideband lines relative to the carrier.
 */
export class SidebandView {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly modulation_hz: number;
    readonly offsets_hz: Float64Array;
    readonly power_dbc: Float64Array;
}

export function anticrossing(coupling_mhz: number, gamma_c_mhz: number, gamma_m_mhz: number, points: number): MapView;

export function sensitivity_curve(scheme: string, noise_k: number, parameter: number, start: number, stop: number, points: number): CurveView;

export function sidebands(coupling_mhz: number, b2_ut: number, modulation_mhz: number, harmonics: number): SidebandView;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_curveview_free: (a: number, b: number) => void;
    readonly __wbg_mapview_free: (a: number, b: number) => void;
    readonly __wbg_sidebandview_free: (a: number, b: number) => void;
    readonly anticrossing: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly curveview_sensitivity: (a: number) => [number, number];
    readonly curveview_x: (a: number) => [number, number];
    readonly mapview_fields_t: (a: number) => [number, number];
    readonly mapview_frequencies_hz: (a: number) => [number, number];
    readonly mapview_magnitude_db: (a: number) => [number, number];
    readonly sensitivity_curve: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number];
    readonly sidebands: (a: number, b: number, c: number, d: number) => [number, number, number];
    readonly sidebandview_modulation_hz: (a: number) => number;
    readonly sidebandview_offsets_hz: (a: number) => [number, number];
    readonly sidebandview_power_dbc: (a: number) => [number, number];
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
