/* tslint:disable */
/* eslint-disable */

/**
 * Entity similarity after 1..=n triples that each score `per_triple`.
 */
export function entity_curve(per_triple: number, n: number): Float64Array;

/**
 * Label confidence of two elements, labels separated by newlines.
 * Returns `[confidence, tier]` or an empty array below the floor.
 */
export function label_confidence(left_iri: string, left_labels: string, right_iri: string, right_labels: string): any[];

/**
 * `[row, similarity]` for two literal values.
 */
export function object_similarity(left: string, right: string): Float64Array;

/**
 * `[compat, divergence]` for one triple pair.
 */
export function triple_score(ent: number, pred: number, fun1: number, fun2: number, inv1: number, inv2: number, obj: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly entity_curve: (a: number, b: number) => [number, number];
    readonly label_confidence: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly object_similarity: (a: number, b: number, c: number, d: number) => [number, number];
    readonly triple_score: (a: number, b: number, c: number, d: number, e: number, f: number, g: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __externref_drop_slice: (a: number, b: number) => void;
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
