// Typed wrapper around the `legalnlp` command line tool. Every call shells
// out to the CLI and moves data through the same files the CLI reads and
// writes, so binding results are the core's results byte for byte; nothing
// is reimplemented here.
//
// The core package must be importable by the Python interpreter used to run
// it (default `python3`, override with LEGALNLP_PYTHON or per-call options).
//
// Handles wrap model files on disk. They are plain synchronous objects and
// are not meant to be shared across worker threads; distinct handles are
// independent.

import { execFileSync } from "node:child_process";
import * as fs from "node:fs";
import * as os from "node:os";
import * as path from "node:path";

/** Error raised when the CLI exits non-zero; carries the core's message. */
export class CliError extends Error {
  override readonly name = "CliError";
  readonly exitCode: number;
  readonly stderr: string;

  constructor(message: string, exitCode: number, stderr: string) {
    super(message);
    this.exitCode = exitCode;
    this.stderr = stderr;
  }
}

/** Error raised when a handle is used after close(). */
export class ClosedHandleError extends Error {
  override readonly name = "ClosedHandleError";
}

export interface CliOptions {
  /** Python interpreter with the core package installed (default python3). */
  pythonBin?: string;
}

function runCli(args: string[], opts: CliOptions = {}): void {
  const bin = opts.pythonBin ?? process.env.LEGALNLP_PYTHON ?? "python3";
  try {
    execFileSync(bin, ["-m", "legalnlp_kit.cli", ...args], {
      stdio: ["ignore", "pipe", "pipe"],
    });
  } catch (err) {
    const e = err as { status?: number | null; stderr?: Buffer; message?: string };
    const stderr = e.stderr ? e.stderr.toString("utf-8") : "";
    const message = stderr.trim().split("\n").pop() || e.message || "legalnlp CLI failed";
    throw new CliError(message, e.status ?? -1, stderr);
  }
}

function makeWorkdir(tag: string): string {
  return fs.mkdtempSync(path.join(os.tmpdir(), `legalnlp-${tag}-`));
}

function writeLines(dir: string, name: string, lines: string[]): string {
  const p = path.join(dir, name);
  fs.writeFileSync(p, lines.length ? lines.join("\n") + "\n" : "");
  return p;
}

function writeSentences(dir: string, name: string, sentences: string[][]): string {
  return writeLines(dir, name, sentences.map((s) => s.join(" ")));
}

function readLines(p: string): string[] {
  const text = fs.readFileSync(p, "utf-8");
  if (text === "") return [];
  return (text.endsWith("\n") ? text.slice(0, -1) : text).split("\n");
}

/** Run `fn` with a throwaway directory that is removed afterwards. */
function withTempDir<T>(tag: string, fn: (dir: string) => T): T {
  const dir = makeWorkdir(tag);
  try {
    return fn(dir);
  } finally {
    fs.rmSync(dir, { recursive: true, force: true });
  }
}

// ---------------------------------------------------------------------------
// cleaning
// ---------------------------------------------------------------------------

export interface CleanOptions {
  /** "word" masks entities and lowercases; "bert" only fixes whitespace. */
  mode?: "word" | "bert";
  /** Skip lowercasing in word mode. */
  keepCase?: boolean;
  /** Entity classes to mask (default: all seven). */
  mask?: string[];
}

/** Clean one text per input line. Inputs must not contain newlines. */
export function clean(lines: string[], opts: CleanOptions = {}, cli: CliOptions = {}): string[] {
  for (const line of lines) {
    if (line.includes("\n")) throw new TypeError("clean() inputs must be single lines");
  }
  return withTempDir("clean", (dir) => {
    const inFile = writeLines(dir, "in.txt", lines);
    const outFile = path.join(dir, "out.txt");
    const args = ["clean", "--in", inFile, "--out", outFile, "--mode", opts.mode ?? "word"];
    if (opts.keepCase) args.push("--keep-case");
    if (opts.mask && opts.mask.length) args.push("--mask", opts.mask.join(","));
    runCli(args, cli);
    return readLines(outFile);
  });
}

/** Case-preserving minimal cleaner (whitespace and control characters only). */
export function cleanBert(lines: string[], cli: CliOptions = {}): string[] {
  return clean(lines, { mode: "bert" }, cli);
}

// ---------------------------------------------------------------------------
// model handles
// ---------------------------------------------------------------------------

export type HandleKind = "phraser" | "embeddings";

/**
 * Opaque reference to a model file produced or loaded through the CLI.
 *
 * close() removes the backing temporary directory (when the handle owns
 * one) and invalidates the handle: any further operation throws
 * ClosedHandleError. close() is idempotent.
 */
export class BoundModelHandle {
  readonly kind: HandleKind;
  readonly modelPath: string;
  private workdir: string | null;
  private open = true;

  /** @internal use trainPhraser/trainEmbeddings/loadEmbeddings */
  constructor(kind: HandleKind, modelPath: string, workdir: string | null) {
    this.kind = kind;
    this.modelPath = modelPath;
    this.workdir = workdir;
  }

  get closed(): boolean {
    return !this.open;
  }

  assertOpen(expected?: HandleKind): void {
    if (!this.open) throw new ClosedHandleError(`${this.kind} handle is closed`);
    if (expected && this.kind !== expected) {
      throw new TypeError(`${expected} handle required, got ${this.kind}`);
    }
  }

  close(): void {
    if (!this.open) return;
    this.open = false;
    if (this.workdir !== null) {
      fs.rmSync(this.workdir, { recursive: true, force: true });
      this.workdir = null;
    }
  }
}

// ---------------------------------------------------------------------------
// phraser
// ---------------------------------------------------------------------------

export interface PhraserOptions {
  passes?: 1 | 2;
  minCount?: number;
  threshold?: number;
  delimiter?: string;
}

/** Fit collocation models on tokenized sentences; returns a file-backed handle. */
export function trainPhraser(
  sentences: string[][],
  opts: PhraserOptions = {},
  cli: CliOptions = {},
): BoundModelHandle {
  const dir = makeWorkdir("phraser");
  try {
    const inFile = writeSentences(dir, "corpus.txt", sentences);
    const modelFile = path.join(dir, "phraser.bin");
    const args = ["train-phraser", "--in", inFile, "--out", modelFile];
    if (opts.passes !== undefined) args.push("--passes", String(opts.passes));
    if (opts.minCount !== undefined) args.push("--min-count", String(opts.minCount));
    if (opts.threshold !== undefined) args.push("--threshold", String(opts.threshold));
    if (opts.delimiter !== undefined) args.push("--delimiter", opts.delimiter);
    runCli(args, cli);
    return new BoundModelHandle("phraser", modelFile, dir);
  } catch (err) {
    fs.rmSync(dir, { recursive: true, force: true });
    throw err;
  }
}

/** Merge collocations in every sentence using a trained phraser handle. */
export function applyPhraser(
  handle: BoundModelHandle,
  sentences: string[][],
  cli: CliOptions = {},
): string[][] {
  handle.assertOpen("phraser");
  return withTempDir("apply", (dir) => {
    const inFile = writeSentences(dir, "corpus.txt", sentences);
    const outFile = path.join(dir, "merged.txt");
    runCli(
      ["apply-phraser", "--in", inFile, "--out", outFile, "--model", handle.modelPath],
      cli,
    );
    return readLines(outFile).map((line) => (line === "" ? [] : line.split(" ")));
  });
}

// ---------------------------------------------------------------------------
// embeddings
// ---------------------------------------------------------------------------

export interface EmbeddingOptions {
  variant?: "w2v-sg" | "w2v-cbow" | "d2v-dm" | "d2v-dbow" | "fasttext-sg" | "fasttext-cbow";
  dim?: number;
  window?: number;
  epochs?: number;
  minCount?: number;
  negative?: number;
  lr?: number;
  sample?: number;
  subwordMinN?: number;
  subwordMaxN?: number;
  subwordBuckets?: number;
  dbowWords?: boolean;
  seed?: number;
  workers?: number;
}

function embeddingArgs(opts: EmbeddingOptions): string[] {
  const args: string[] = [];
  if (opts.variant !== undefined) args.push("--variant", opts.variant);
  if (opts.dim !== undefined) args.push("--dim", String(opts.dim));
  if (opts.window !== undefined) args.push("--window", String(opts.window));
  if (opts.epochs !== undefined) args.push("--epochs", String(opts.epochs));
  if (opts.minCount !== undefined) args.push("--min-count", String(opts.minCount));
  if (opts.negative !== undefined) args.push("--negative", String(opts.negative));
  if (opts.lr !== undefined) args.push("--lr", String(opts.lr));
  if (opts.sample !== undefined) args.push("--sample", String(opts.sample));
  if (opts.subwordMinN !== undefined) args.push("--subword-min-n", String(opts.subwordMinN));
  if (opts.subwordMaxN !== undefined) args.push("--subword-max-n", String(opts.subwordMaxN));
  if (opts.subwordBuckets !== undefined) args.push("--subword-buckets", String(opts.subwordBuckets));
  if (opts.dbowWords) args.push("--dbow-words");
  if (opts.seed !== undefined) args.push("--seed", String(opts.seed));
  if (opts.workers !== undefined) args.push("--workers", String(opts.workers));
  return args;
}

/** Train an embedding model on tokenized sentences; returns a file-backed handle. */
export function trainEmbeddings(
  sentences: string[][],
  opts: EmbeddingOptions = {},
  cli: CliOptions = {},
): BoundModelHandle {
  const dir = makeWorkdir("embed");
  try {
    const inFile = writeSentences(dir, "corpus.txt", sentences);
    const modelFile = path.join(dir, "model.bin");
    runCli(
      ["train-embeddings", "--in", inFile, "--out", modelFile, ...embeddingArgs(opts)],
      cli,
    );
    return new BoundModelHandle("embeddings", modelFile, dir);
  } catch (err) {
    fs.rmSync(dir, { recursive: true, force: true });
    throw err;
  }
}

/** Wrap an existing model file; the caller keeps ownership of the file. */
export function loadEmbeddings(modelPath: string): BoundModelHandle {
  const fd = fs.openSync(modelPath, "r");
  const magic = Buffer.alloc(4);
  try {
    fs.readSync(fd, magic, 0, 4, 0);
  } finally {
    fs.closeSync(fd);
  }
  if (magic.toString("latin1") !== "LNLP") {
    throw new CliError(`${modelPath} is not a legalnlp model file`, 1, "");
  }
  return new BoundModelHandle("embeddings", modelPath, null);
}

export interface SimilarRow {
  token: string;
  score: number;
}

/** Exact TSV produced by the core for the top-k neighbors of a token. */
export function mostSimilarRaw(
  handle: BoundModelHandle,
  token: string,
  k = 10,
  cli: CliOptions = {},
): string {
  handle.assertOpen("embeddings");
  return withTempDir("similar", (dir) => {
    const outFile = path.join(dir, "similar.tsv");
    runCli(
      ["similar", "--model", handle.modelPath, "--token", token, "--k", String(k), "--out", outFile],
      cli,
    );
    return fs.readFileSync(outFile, "utf-8");
  });
}

/** Top-k cosine neighbors of a token, parsed from the core's TSV. */
export function mostSimilar(
  handle: BoundModelHandle,
  token: string,
  k = 10,
  cli: CliOptions = {},
): SimilarRow[] {
  return mostSimilarRaw(handle, token, k, cli)
    .split("\n")
    .filter((line) => line !== "")
    .map((line) => {
      const [tok, score] = line.split("\t");
      return { token: tok, score: Number(score) };
    });
}

export interface ProjectOptions {
  /** When given, emit per-center neighborhoods instead of the full vocabulary. */
  centers?: string[];
  k?: number;
}

/** Exact TSV of the 2D PCA projection (or per-center neighborhood report). */
export function pcaProjectRaw(
  handle: BoundModelHandle,
  opts: ProjectOptions = {},
  cli: CliOptions = {},
): string {
  handle.assertOpen("embeddings");
  return withTempDir("project", (dir) => {
    const outFile = path.join(dir, "coords.tsv");
    const args = ["project", "--model", handle.modelPath, "--out", outFile];
    if (opts.centers && opts.centers.length) args.push("--centers", opts.centers.join(","));
    if (opts.k !== undefined) args.push("--k", String(opts.k));
    runCli(args, cli);
    return fs.readFileSync(outFile, "utf-8");
  });
}

export interface ProjectionRow {
  token: string;
  x: number;
  y: number;
}

/** 2D PCA coordinates for every vocabulary token. */
export function pcaProject(handle: BoundModelHandle, cli: CliOptions = {}): ProjectionRow[] {
  const lines = pcaProjectRaw(handle, {}, cli).split("\n").filter((l) => l !== "");
  return lines.slice(1).map((line) => {
    const [token, x, y] = line.split("\t");
    return { token, x: Number(x), y: Number(y) };
  });
}

// ---------------------------------------------------------------------------
// classification
// ---------------------------------------------------------------------------

export interface LabeledRecord {
  id: string;
  text: string;
  label: string;
}

export interface ClassifyOptions {
  trainFraction?: number;
  inferSteps?: number;
  lr?: number;
  epochs?: number;
  l2?: number;
  seed?: number;
}

/** Exact report JSON written by the core classify command. */
export function classifyRaw(
  records: LabeledRecord[],
  embeddings: BoundModelHandle,
  opts: ClassifyOptions = {},
  cli: CliOptions = {},
): string {
  embeddings.assertOpen("embeddings");
  return withTempDir("classify", (dir) => {
    const inFile = writeLines(dir, "labeled.jsonl", records.map((r) => JSON.stringify(r)));
    const outFile = path.join(dir, "report.json");
    const args = [
      "classify", "--in", inFile, "--out", outFile,
      "--embeddings", embeddings.modelPath,
    ];
    if (opts.trainFraction !== undefined) args.push("--train-fraction", String(opts.trainFraction));
    if (opts.inferSteps !== undefined) args.push("--infer-steps", String(opts.inferSteps));
    if (opts.lr !== undefined) args.push("--lr", String(opts.lr));
    if (opts.epochs !== undefined) args.push("--epochs", String(opts.epochs));
    if (opts.l2 !== undefined) args.push("--l2", String(opts.l2));
    if (opts.seed !== undefined) args.push("--seed", String(opts.seed));
    runCli(args, cli);
    return fs.readFileSync(outFile, "utf-8");
  });
}

export interface PerClassMetrics {
  label: string;
  precision: number;
  recall: number;
  f1: number;
  support: number;
}

export interface EvalReport {
  accuracy: number;
  confusion: number[][];
  f1_macro: number;
  f1_weighted: number;
  per_class: PerClassMetrics[];
}

/** Train/evaluate a softmax classifier over document embeddings. */
export function classify(
  records: LabeledRecord[],
  embeddings: BoundModelHandle,
  opts: ClassifyOptions = {},
  cli: CliOptions = {},
): EvalReport {
  return JSON.parse(classifyRaw(records, embeddings, opts, cli)) as EvalReport;
}

/** Exact report JSON of the synthetic end-to-end demo. */
export function demoRaw(n?: number, seed?: number, cli: CliOptions = {}): string {
  return withTempDir("demo", (dir) => {
    const outFile = path.join(dir, "report.json");
    const args = ["demo", "--out", outFile];
    if (n !== undefined) args.push("--n", String(n));
    if (seed !== undefined) args.push("--seed", String(seed));
    runCli(args, cli);
    return fs.readFileSync(outFile, "utf-8");
  });
}

/** Synthetic end-to-end classification demo, parsed. */
export function demo(n?: number, seed?: number, cli: CliOptions = {}): EvalReport {
  return JSON.parse(demoRaw(n, seed, cli)) as EvalReport;
}
