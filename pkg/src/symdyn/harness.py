"""Seeded Monte Carlo and exact experiments over the coding schemes.

Every block draws from its own generator, derived from ``(seed, block)``
through :class:`numpy.random.SeedSequence`, so serial and pooled runs give
identical records.  Reports are JSON (plus a CSV of per-block records) and
contain no timestamps: the same config always yields the same bytes.
"""

from __future__ import annotations

import csv
import hashlib
import io
import itertools
import json
import math
import operator
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from functools import partial, reduce
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .feedforward import (
    CodecParams,
    DistortionMeasure,
    JointPMF,
    block_distortion,
    bsc_joint,
    build_pm_dual,
    decode,
    delta_interval,
    encode,
    noiseless_joint,
)
from .infotheory import entropy, exceeds_pow2, log2_frac, mutual_information
from .intervals import BoundaryPoint, frac, frac_str
from .lossless import build_gauss, build_memoryless, cf_convergents, fundamental_interval
from .source import SourceModel, State, fundamental_measure, fundamental_set, trajectory

LEVY_CONSTANT = math.pi ** 2 / (12 * math.log(2))
GAUSS_ENTROPY_RATE = math.pi ** 2 / (6 * math.log(2))


# -- randomness --------------------------------------------------------------


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block,))))


def random_bits(rng: np.random.Generator, b: int) -> int:
    nbytes = (b + 7) // 8
    return int.from_bytes(rng.bytes(nbytes), "big") >> (8 * nbytes - b)


def dyadic_from_bits(bits: int, b: int) -> Fraction:
    return Fraction(bits, 1 << b)


def randbelow(rng: np.random.Generator, bound: int) -> int:
    if bound < 1 << 62:
        return int(rng.integers(bound))
    b = bound.bit_length()
    while True:
        v = random_bits(rng, b)
        if v < bound:
            return v


def sample_initial_state(rng: np.random.Generator, b: int, model: SourceModel | None = None) -> State:
    """Independent b-bit dyadic theta and phi, redrawn off partition endpoints."""
    while True:
        theta = dyadic_from_bits(random_bits(rng, b), b)
        phi = dyadic_from_bits(random_bits(rng, b), b)
        if theta == 0 or phi == 0:
            continue
        if model is not None and (model.theta_partition.is_boundary(theta)
                                  or model.phi_partition.is_boundary(phi)):
            continue
        return State(theta, phi)


def sample_iid(rng: np.random.Generator, p: Sequence[Fraction], n: int) -> tuple:
    """Exact i.i.d. categorical draws by inverting integer cumulative weights."""
    scale = reduce(math.lcm, (v.denominator for v in p), 1)
    cum = list(itertools.accumulate(int(v * scale) for v in p))
    out = []
    for _ in range(n):
        u = randbelow(rng, scale)
        out.append(next(i for i, c in enumerate(cum) if u < c))
    return tuple(out)


def default_precision(n: int) -> int:
    return 64 + 4 * n


def _run_blocks(fn: Callable[[int], dict], blocks: int, workers: int = 1) -> list[dict]:
    if workers <= 1:
        return [fn(b) for b in range(blocks)]
    with ProcessPoolExecutor(workers) as pool:
        return list(pool.map(fn, range(blocks), chunksize=max(1, blocks // (4 * workers))))


def tv_distance(counts: Counter, reference: dict, total: int) -> float:
    keys = set(counts) | set(reference)
    return float(sum(abs(Fraction(counts.get(k, 0), total) - reference.get(k, 0)) for k in keys) / 2)


def _digest(y: Sequence[int]) -> str:
    return hashlib.sha256(",".join(map(str, y)).encode()).hexdigest()[:16]


def _mean(values) -> float | None:
    values = list(values)
    return float(sum(values) / len(values)) if values else None


def model_joint(model: SourceModel) -> dict:
    """Exact ``P(X=x, Y=y)`` implied by the partitions and the output table."""
    p_x, p_z = model.p_x, model.p_z
    joint: dict = {}
    for x in range(model.x_size):
        for z in range(model.z_size):
            key = (x, model.output(x, z))
            joint[key] = joint.get(key, 0) + p_x[x] * p_z[z]
    return joint


# -- model specs -------------------------------------------------------------


def model_from_spec(spec: dict) -> SourceModel:
    """Build a model from a config entry.

    ``{"type": "bsc", "D": "1/4"}``, ``{"type": "joint", "p_y": [...],
    "p_x_given_y": [[...]]}``, ``{"type": "noiseless", "p_y": [...]}``,
    ``{"type": "memoryless", "p_y": [...]}``, ``{"type": "gauss"}`` or
    ``{"file": "model.json"}``.
    """
    if "file" in spec:
        return SourceModel.from_json(Path(spec["file"]).read_text())
    kind = spec["type"]
    if kind == "bsc":
        return build_pm_dual(bsc_joint(frac(spec["D"])))
    if kind == "joint":
        pmf = JointPMF.from_channel(spec["p_y"], spec["p_x_given_y"])
        mix = spec.get("mix")
        return build_pm_dual(pmf, mix=None if mix is None else frac(mix))
    if kind == "noiseless":
        return build_pm_dual(noiseless_joint(spec["p_y"]), strict=False)
    if kind == "memoryless":
        return build_memoryless([frac(v) for v in spec["p_y"]])
    if kind == "gauss":
        return build_gauss()
    raise ValueError(f"unknown model type {kind!r}")


# -- exact and distributional checks -------------------------------------------


def exact_product_law(model: SourceModel, n: int) -> dict:
    """Compare fundamental-set areas with i.i.d. products for every y^n."""
    p_y = Counter()
    for (x, y), p in model_joint(model).items():
        p_y[y] += p
    checked = violations = 0
    for y in itertools.product(range(model.y_size), repeat=n):
        expected = reduce(operator.mul, (p_y[v] for v in y), Fraction(1))
        checked += 1
        if fundamental_measure(fundamental_set(model, y)) != expected:
            violations += 1
    return {"n": n, "checked": checked, "violations": violations}


def _lemma3_block(model: SourceModel, window: int, precision: int, seed: int, block: int) -> tuple:
    rng = block_rng(seed, block)
    while True:
        s0 = sample_initial_state(rng, precision, model)
        try:
            tr = trajectory(model, s0, window)
        except BoundaryPoint:
            continue
        return tr.x[-1], tr.y[-1], tr.z[-1], tr.y[-2], tr.x[-2]


def verify_lemma3(model: SourceModel, samples: int, window: int = 4, seed: int = 0,
                  precision: int | None = None, workers: int = 1) -> dict:
    """Total-variation distances of simulated symbol statistics from their targets.

    Each sample runs ``window`` steps from a uniform initial state and looks
    at the last step n and its predecessor.
    """
    if window < 2:
        raise ValueError("window must be at least 2")
    precision = precision or default_precision(window)
    rows = _run_blocks(partial(_lemma3_block, model, window, precision, seed), samples, workers)
    joint = model_joint(model)
    p_x = dict(enumerate(model.p_x))
    p_z = dict(enumerate(model.p_z))
    p_y = Counter()
    for (x, y), p in joint.items():
        p_y[y] += p
    prod = lambda a, b: {(i, j): a[i] * b[j] for i in a for j in b}  # noqa: E731
    stats = {
        "samples": samples,
        "window": window,
        "tv_xy": tv_distance(Counter((r[0], r[1]) for r in rows), joint, samples),
        "tv_y": tv_distance(Counter(r[1] for r in rows), p_y, samples),
        "tv_y_pairs": tv_distance(Counter((r[3], r[1]) for r in rows), prod(p_y, p_y), samples),
        "tv_x_vs_prev_y": tv_distance(Counter((r[0], r[3]) for r in rows), prod(p_x, p_y), samples),
        "tv_z": tv_distance(Counter(r[2] for r in rows), p_z, samples),
        "tv_z_vs_x": tv_distance(Counter((r[2], r[0]) for r in rows), prod(p_z, p_x), samples),
        "tv_z_vs_prev_x": tv_distance(Counter((r[2], r[4]) for r in rows), prod(p_z, p_x),
                                      samples),
        "x_equals_y_rate": sum(r[0] == r[1] for r in rows) / samples,
    }
    return stats


def _theorem1_block(model: SourceModel, n: int, rate: Fraction, epsilon: Fraction,
                    precision: int, seed: int, block: int) -> dict:
    rng = block_rng(seed, block)
    while True:
        s0 = sample_initial_state(rng, precision, model)
        try:
            y = trajectory(model, s0, n).y
            break
        except BoundaryPoint:
            continue
    delta = delta_interval(model, y, epsilon)
    log2_len = log2_frac(delta.length)
    return {
        "block": block,
        "y_digest": _digest(y),
        "log2_delta_len": float(log2_len),
        "delta_too_long": exceeds_pow2(delta.length, n * rate),
        "theta_outside": s0.theta not in delta,
    }


def verify_theorem1(model: SourceModel, n: int, rate: Fraction, epsilon: Fraction, blocks: int,
                    seed: int = 0, precision: int | None = None, workers: int = 1) -> dict:
    """Concentration of the Delta interval around the true initial theta.

    ``rate`` is the comparison rate R < I(X;Y): a block counts as too long
    when ``|Delta| > 2**(-n*R)``, decided exactly.
    """
    precision = precision or default_precision(n)
    records = _run_blocks(partial(_theorem1_block, model, n, frac(rate), frac(epsilon),
                                  precision, seed), blocks, workers)
    info = mutual_information(_joint_table(model))
    return {
        "records": records,
        "aggregates": {
            "mutual_information": float(info),
            "frac_delta_too_long": sum(r["delta_too_long"] for r in records) / blocks,
            "frac_theta_outside": sum(r["theta_outside"] for r in records) / blocks,
            "mean_delta_rate": _mean(-r["log2_delta_len"] / n for r in records),
        },
    }


def _joint_table(model: SourceModel) -> list[list[Fraction]]:
    joint = model_joint(model)
    return [[joint.get((x, y), Fraction(0)) for y in range(model.y_size)]
            for x in range(model.x_size)]


def _rd_block(model: SourceModel, params: CodecParams, p_y, dist: DistortionMeasure,
              keep: bool, seed: int, block: int) -> dict:
    rng = block_rng(seed, block)
    y = sample_iid(rng, p_y, params.n)
    code = encode(model, y, params)
    x_hat = decode(model, code.m, params, y)
    again = decode(model, code.m, params, y)
    record = {
        "block": block,
        "success": code.success,
        "m": code.m,
        "log2_delta_len": float(log2_frac(code.delta.length)),
        "distortion": float(block_distortion(x_hat, y, dist)),
        "companion_attempts": code.attempts,
        "distortion_exact": frac_str(block_distortion(x_hat, y, dist)),
        "y_digest": _digest(y),
        "decoder_deterministic": x_hat == again,
        "decoder_matches_encoder": (not code.success) or x_hat == code.x,
    }
    if keep:
        record["y"] = ",".join(map(str, y))
        record["x_hat"] = ",".join(map(str, x_hat))
    return record


def rd_experiment(model: SourceModel, params: CodecParams, blocks: int, seed: int = 0,
                  distortion: DistortionMeasure | None = None, workers: int = 1,
                  keep_sequences: bool = False) -> dict:
    """Encode i.i.d. blocks, decode them with feedforward, tally distortion.

    ``keep_sequences`` stores y and the reconstruction in every record so the
    distortion column can be audited.
    """
    joint = _joint_table(model)
    p_y = [sum(col) for col in zip(*joint)]
    dist = distortion or DistortionMeasure.hamming(model.x_size)
    fn = partial(_rd_block, model, params, p_y, dist, keep_sequences, seed)
    records = _run_blocks(fn, blocks, workers)
    ok = [r for r in records if r["success"]]
    target = sum(joint[x][y] * dist(x, y) for x in range(len(joint)) for y in range(len(p_y)))
    return {
        "records": records,
        "aggregates": {
            "mutual_information": float(mutual_information(joint)),
            "effective_rate": float(log2_frac(Fraction(params.grid.size)) / params.n),
            "success_rate": len(ok) / blocks,
            "failure_rate": 1 - len(ok) / blocks,
            "mean_distortion_success": _mean(r["distortion"] for r in ok),
            "mean_distortion_all": _mean(r["distortion"] for r in records),
            "target_distortion": float(target),
            "decoder_deterministic": all(r["decoder_deterministic"] for r in records),
            "decoder_matches_encoder": all(r["decoder_matches_encoder"] for r in records),
        },
    }


def _lossless_block(model: SourceModel, p_y, n: int, seed: int, block: int) -> dict:
    rng = block_rng(seed, block)
    y = sample_iid(rng, p_y, n)
    length = fundamental_interval(model, y).length
    return {"block": block, "y_digest": _digest(y), "rate": float(-log2_frac(length) / n)}


def lossless_rate_experiment(p_y: Sequence, n: int, blocks: int, seed: int = 0,
                             tolerance: float = 0.05, workers: int = 1) -> dict:
    """Per-block ``-log2|fundamental interval| / n`` against H(Y)."""
    p_y = [frac(v) for v in p_y]
    model = build_memoryless(p_y)
    records = _run_blocks(partial(_lossless_block, model, p_y, n, seed), blocks, workers)
    h = float(entropy(p_y))
    return {
        "records": records,
        "aggregates": {
            "entropy": h,
            "mean_rate": _mean(r["rate"] for r in records),
            "frac_within_tolerance": sum(abs(r["rate"] - h) <= tolerance for r in records) / blocks,
            "tolerance": tolerance,
        },
    }


def _gauss_state_block(n: int, precision: int, seed: int, block: int) -> float:
    rng = block_rng(seed, block)
    model = build_gauss()
    while True:
        s0 = sample_initial_state(rng, precision, model)
        try:
            return float(trajectory(model, s0, n - 1).states[-1].theta)
        except BoundaryPoint:
            continue


def _levy_block(n: int, precision: int, seed: int, block: int) -> dict:
    rng = block_rng(seed, block)
    model = build_gauss()
    while True:
        s0 = sample_initial_state(rng, precision, model)
        try:
            digits = trajectory(model, s0, n).y
            break
        except BoundaryPoint:
            continue
    _, q = cf_convergents(digits)
    log2_q = float(log2_frac(Fraction(q)))
    return {"block": block, "log2_q_rate": log2_q / n, "ln_q_rate": log2_q * math.log(2) / n}


def invariant_cdf(t):
    return np.log2(1 + np.asarray(t, dtype=float))


def sup_distance_to_invariant(values: Sequence[float]) -> float:
    """Kolmogorov distance between the empirical CDF and log2(1 + t)."""
    v = np.sort(np.asarray(values, dtype=float))
    k = len(v)
    f = invariant_cdf(v)
    upper = np.arange(1, k + 1) / k - f
    lower = f - np.arange(0, k) / k
    return float(max(upper.max(), lower.max()))


def gauss_experiment(samples: int, n_state: int = 50, trajectories: int = 100,
                     n_levy: int = 5000, seed: int = 0, workers: int = 1) -> dict:
    """Invariant-density fit of theta_n and the growth rate of convergent denominators."""
    thetas = _run_blocks(partial(_gauss_state_block, n_state, default_precision(n_state), seed),
                         samples, workers)
    records = _run_blocks(partial(_levy_block, n_levy, default_precision(n_levy), seed + 1),
                          trajectories, workers)
    levy = _mean(r["log2_q_rate"] for r in records)
    return {
        "records": records,
        "aggregates": {
            "cdf_sup_distance": sup_distance_to_invariant(thetas),
            "state_samples": samples,
            "mean_log2_q_rate": levy,
            "mean_ln_q_rate": _mean(r["ln_q_rate"] for r in records),
            "levy_target": LEVY_CONSTANT,
            "levy_relative_error": abs(levy - LEVY_CONSTANT) / LEVY_CONSTANT,
            "entropy_rate_target": GAUSS_ENTROPY_RATE,
        },
    }


# -- configs and reports -----------------------------------------------------

KINDS = ("rd", "theorem1", "lemma3", "lossless_rate", "gauss")
OPS = {"<=": operator.le, ">=": operator.ge, "<": operator.lt, ">": operator.gt,
       "==": operator.eq}


@dataclass
class ExperimentConfig:
    kind: str
    model: dict = field(default_factory=dict)
    params: dict = field(default_factory=dict)
    blocks: int = 1
    seed: int = 0
    precision: int | None = None
    output: str | None = None
    assertions: list = field(default_factory=list)
    workers: int = 1

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment kind {self.kind!r}")
        if self.blocks < 1:
            raise ValueError("need at least one block")
        n = self.params.get("n")
        if self.precision is not None and n is not None and self.precision < default_precision(n):
            raise ValueError(f"precision must be at least {default_precision(n)} bits")

    @classmethod
    def from_dict(cls, data: dict) -> ExperimentConfig:
        return cls(**data)

    @classmethod
    def from_json(cls, text: str) -> ExperimentConfig:
        return cls.from_dict(json.loads(text))

    def to_dict(self) -> dict:
        return {k: getattr(self, k) for k in ("kind", "model", "params", "blocks", "seed",
                                              "precision", "output", "assertions")}


@dataclass
class Report:
    kind: str
    config: dict
    aggregates: dict
    records: list = field(default_factory=list)
    checks: list = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c["passed"] for c in self.checks)

    def to_json(self) -> str:
        return json.dumps({"kind": self.kind, "config": self.config, "aggregates": self.aggregates,
                           "checks": self.checks, "passed": self.passed,
                           "records": self.records}, indent=1, sort_keys=True)

    def to_csv(self) -> str:
        buf = io.StringIO()
        if self.records:
            columns = list(self.records[0])
            writer = csv.DictWriter(buf, fieldnames=columns, lineterminator="\n")
            writer.writeheader()
            writer.writerows(self.records)
        return buf.getvalue()

    def write(self, path: str | Path) -> tuple[Path, Path]:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.to_json())
        csv_path = path.with_suffix(".csv")
        csv_path.write_text(self.to_csv())
        return path, csv_path


def _codec_params(p: dict) -> CodecParams:
    keys = ("n", "rate", "epsilon", "delta", "budget", "order", "seed")
    return CodecParams(**{k: p[k] for k in keys if k in p})


def run_experiment(cfg: ExperimentConfig) -> Report:
    p = cfg.params
    if cfg.kind == "rd":
        model = model_from_spec(cfg.model)
        dist = DistortionMeasure(p["distortion"]) if "distortion" in p else None
        out = rd_experiment(model, _codec_params(p), cfg.blocks, cfg.seed, dist, cfg.workers,
                            p.get("keep_sequences", False))
    elif cfg.kind == "theorem1":
        model = model_from_spec(cfg.model)
        out = verify_theorem1(model, p["n"], frac(p["rate"]), frac(p.get("epsilon", "1/20")),
                              cfg.blocks, cfg.seed, cfg.precision, cfg.workers)
    elif cfg.kind == "lemma3":
        model = model_from_spec(cfg.model)
        out = {"aggregates": verify_lemma3(model, cfg.blocks, p.get("window", 4), cfg.seed,
                                           cfg.precision, cfg.workers), "records": []}
        if "exact_n" in p:
            out["aggregates"]["exact"] = exact_product_law(model, p["exact_n"])
            out["aggregates"]["exact_violations"] = out["aggregates"]["exact"]["violations"]
    elif cfg.kind == "lossless_rate":
        out = lossless_rate_experiment(cfg.model["p_y"], p["n"], cfg.blocks, cfg.seed,
                                       p.get("tolerance", 0.05), cfg.workers)
    else:
        out = gauss_experiment(cfg.blocks, p.get("n_state", 50), p.get("trajectories", 100),
                               p.get("n_levy", 5000), cfg.seed, cfg.workers)
    checks = []
    for a in cfg.assertions:
        value = out["aggregates"][a["stat"]]
        checks.append({"stat": a["stat"], "op": a["op"], "value": a["value"], "observed": value,
                       "passed": bool(OPS[a["op"]](value, a["value"]))})
    report = Report(cfg.kind, cfg.to_dict(), out["aggregates"], out["records"], checks)
    if cfg.output:
        report.write(cfg.output)
    return report




def _word_block(model: SourceModel, n: int, precision: int, seed: int, block: int) -> tuple:
    rng = block_rng(seed, block)
    while True:
        try:
            return trajectory(model, sample_initial_state(rng, precision, model), n).y
        except BoundaryPoint:
            continue


def word_frequency_check(model: SourceModel, n: int, samples: int, seed: int = 0,
                         workers: int = 1) -> dict:
    """Largest standard-error distance between simulated and exact word probabilities."""
    words = Counter(_run_blocks(partial(_word_block, model, n, default_precision(n), seed),
                                samples, workers))
    worst = 0.0
    for y in itertools.product(range(model.y_size), repeat=n):
        p = float(fundamental_measure(fundamental_set(model, y)))
        se = math.sqrt(p * (1 - p) / samples)
        if se > 0:
            worst = max(worst, abs(words.get(y, 0) / samples - p) / se)
    return {"n": n, "samples": samples, "max_standard_errors": worst}
