/* tslint:disable */
/* eslint-disable */

/**
 * Cleaned and anonymized tokens of one description, as
 * `{"tokens": [...], "text": "..."}`.
 */
export function clean(description: string): string;

/**
 * Category the shipped rules assign, as `{"category": str|null, "value": "-12.30"}`.
 * `value` is in currency units; negative means expense.
 */
export function label(description: string, value: number): string;

/**
 * Near-duplicate analysis of the non-empty lines of `text` at `threshold`:
 * every pair at or above it, and which lines dedup would keep. Indices
 * count non-empty lines from 0.
 */
export function near_duplicates(text: string, threshold: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly clean: (a: number, b: number) => [number, number];
    readonly label: (a: number, b: number, c: number) => [number, number];
    readonly near_duplicates: (a: number, b: number, c: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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
