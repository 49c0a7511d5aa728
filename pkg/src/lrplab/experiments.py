"""Reproducible experiment runner: configs, outputs, manifests.

Every run is a pure function of its ExperimentConfig: all randomness is
keyed from the master seed, job results are merged in replicate order,
and floats are emitted with 17 significant digits, so identical configs
produce byte-identical data files.  The manifest records the config
snapshot, code version, timestamps, RNG stream accounting, and a sha256
per data file; timestamps live only in the manifest.  A failed run
removes its partial data files and leaves the manifest marked failed.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .graph import ModelConfig, export_text, sample_graph, save_binary
from .metric import geodesic_dag, sample_geodesic
from .rng import RngStream
from .scaling import (Ladder, atom_trend, ecdf, estimate_medians,
                      fit_theta)
from .dimension import (GoodCubeParams, connected_set_growth,
                        good_cube_rate, mean_dimension_fit)
from .firework import (FireworkModel, build_ladder, compute_crossing_probs,
                       coupling_checks, reach_tail, simulate_xi_vector)
from .sperner import generate_family, sperner_bound_check

EXPERIMENT_KINDS = ("sample", "scaling", "dim", "goodcubes", "sperner",
                    "firework", "xi-coupling")

# allowed keys per config section; unknown keys are hard errors
_SCHEMA = {
    "top": {"kind", "seed", "out", "jobs", "model", "params"},
    "model": {"d", "beta"},
    "sample": {"n"},
    "scaling": {"n_values", "replicates"},
    "dim": {"n", "geodesics", "scales", "theta_source", "theta",
            "n_values", "replicates"},
    "goodcubes": {"s", "alphas", "b", "theta", "a_s", "replicates",
                  "a_s_replicates", "cs_n", "cs_k", "cs_replicates"},
    "sperner": {"n_values", "families_per_n", "p_values", "generator",
                "target_size"},
    "firework": {"eps", "theta", "c_star1", "c2", "beta", "k_min", "k_max",
                 "runs", "mk_variant"},
    "xi-coupling": {"eps", "theta", "c_star1", "beta", "resolution", "runs",
                    "max_subset_size"},
}


class ConfigError(ValueError):
    pass


class IntegrityError(RuntimeError):
    pass


@dataclass
class ExperimentConfig:
    kind: str
    seed: int
    out: str
    d: int
    beta: float
    params: dict
    jobs: int = 1

    def to_dict(self) -> dict:
        return {"kind": self.kind, "seed": self.seed, "out": self.out,
                "jobs": self.jobs, "model": {"d": self.d, "beta": self.beta},
                "params": dict(self.params)}


def parse_config(raw: dict, overrides: dict | None = None) -> ExperimentConfig:
    """Validate a raw config document; unknown keys are named errors."""
    raw = dict(raw)
    if overrides:
        for key, val in overrides.items():
            if val is None:
                continue
            if key in ("seed", "out", "jobs"):
                raw[key] = val
            else:
                raise ConfigError(f"unknown override: {key}")
    unknown = set(raw) - _SCHEMA["top"]
    if unknown:
        raise ConfigError(f"unknown config key: {sorted(unknown)[0]}")
    kind = raw.get("kind")
    if kind not in EXPERIMENT_KINDS:
        raise ConfigError(f"unknown experiment kind: {kind!r}")
    model = raw.get("model", {})
    unknown = set(model) - _SCHEMA["model"]
    if unknown:
        raise ConfigError(f"unknown model key: {sorted(unknown)[0]}")
    params = raw.get("params", {})
    unknown = set(params) - _SCHEMA[kind]
    if unknown:
        raise ConfigError(f"unknown {kind} parameter: {sorted(unknown)[0]}")
    if "out" not in raw:
        raise ConfigError("missing required key: out")
    return ExperimentConfig(kind=kind, seed=int(raw.get("seed", 0)),
                            out=str(raw["out"]),
                            d=int(model.get("d", 1)),
                            beta=float(model.get("beta", 1.0)),
                            params=params, jobs=int(raw.get("jobs", 1)))


def load_config(path, overrides: dict | None = None) -> ExperimentConfig:
    with open(path) as fh:
        return parse_config(json.load(fh), overrides)


# ---------------------------------------------------------------------------
# formatting helpers


def fmt(x) -> str:
    if isinstance(x, str):
        return x
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return f"{float(x):.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(x) for x in row) + "\n")


def _json_default(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Fraction):
        return str(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)}")


def write_json(path: Path, obj) -> None:
    with open(path, "w", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)
        fh.write("\n")


def sha256_file(path: Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


# ---------------------------------------------------------------------------
# runner


@dataclass
class RunManifest:
    status: str
    kind: str
    config: dict
    code_version: str
    started_at: float
    finished_at: float | None
    outputs: dict
    rng_streams: int
    error: str | None = None

    def to_dict(self) -> dict:
        return self.__dict__.copy()


def run(config: ExperimentConfig) -> RunManifest:
    """Execute the experiment, write outputs and the manifest."""
    out_dir = Path(config.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = RunManifest(status="running", kind=config.kind,
                           config=config.to_dict(),
                           code_version=__version__,
                           started_at=time.time(), finished_at=None,
                           outputs={}, rng_streams=0)
    _write_manifest(out_dir, manifest)
    written: list[Path] = []
    try:
        runner = _RUNNERS[config.kind]
        files, streams = runner(config, out_dir, written)
        manifest.outputs = {f.name: sha256_file(f) for f in files}
        manifest.rng_streams = streams
        manifest.status = "complete"
    except Exception as exc:
        for f in written:
            f.unlink(missing_ok=True)
        manifest.status = "failed"
        manifest.error = f"{type(exc).__name__}: {exc}"
        manifest.finished_at = time.time()
        _write_manifest(out_dir, manifest)
        raise
    manifest.finished_at = time.time()
    _write_manifest(out_dir, manifest)
    return manifest


def _write_manifest(out_dir: Path, manifest: RunManifest) -> None:
    write_json(out_dir / "manifest.json", manifest.to_dict())


def _target(out_dir: Path, written: list, name: str) -> Path:
    path = out_dir / name
    written.append(path)
    return path


# ---------------------------------------------------------------------------
# experiment implementations


def _run_sample(config: ExperimentConfig, out_dir: Path, written: list):
    n = int(config.params.get("n", 256))
    cfg = ModelConfig(d=config.d, beta=config.beta, n=n, seed=config.seed)
    g = sample_graph(cfg)
    binary = _target(out_dir, written, "graph.lrpg")
    save_binary(g, binary)
    text = _target(out_dir, written, "edges.txt")
    export_text(g, text)
    from .graph import representative_displacements
    streams = sum(1 for _ in representative_displacements(config.d, n))
    return [binary, text], streams


def _scaling_outputs(config, out_dir, written, fit):
    files = []
    medians = _target(out_dir, written, "medians.csv")
    write_csv(medians, ["n", "a_n", "ci_lo", "ci_hi", "replicates"],
              [(n, fit.medians[i], fit.ci_lo[i], fit.ci_hi[i],
                fit.replicates) for i, n in enumerate(fit.n_values)])
    files.append(medians)
    for n in fit.n_values:
        e = ecdf(fit, n)
        path = _target(out_dir, written, f"ecdf_{n}.csv")
        write_csv(path, ["value"], [(v,) for v in e.values])
        files.append(path)
    theta = _target(out_dir, written, "theta.json")
    write_json(theta, {"theta_hat": fit.theta_hat,
                       "r_squared": fit.r_squared,
                       "ci": list(fit.theta_ci),
                       "boundary_check": fit.boundary_check})
    files.append(theta)
    return files


def _run_scaling(config: ExperimentConfig, out_dir: Path, written: list):
    p = config.params
    ladder = Ladder(n_values=tuple(int(n) for n in p["n_values"]),
                    replicates=int(p.get("replicates", 50)))
    fit = estimate_medians(config.d, config.beta, ladder, config.seed,
                           jobs=config.jobs)
    fit = fit_theta(fit)
    files = _scaling_outputs(config, out_dir, written, fit)
    atoms = _target(out_dir, written, "atoms.csv")
    masses, rho, pval = atom_trend([ecdf(fit, n) for n in fit.n_values])
    write_csv(atoms, ["n", "max_atom_mass"],
              list(zip(fit.n_values, masses)))
    trend = _target(out_dir, written, "atom_trend.json")
    write_json(trend, {"spearman_rho": rho, "p_value": pval})
    streams = len(fit.n_values) * (ladder.replicates + 1)
    return files + [atoms, trend], streams


def _run_dim(config: ExperimentConfig, out_dir: Path, written: list):
    p = config.params
    n = int(p.get("n", 2048))
    n_geo = int(p.get("geodesics", 100))
    scales = [int(j) for j in p.get("scales", [2, 3, 4, 5, 6])]
    theta_source = p.get("theta_source", "fit")
    files = []
    if theta_source == "manual":
        theta = float(p["theta"])
    elif theta_source == "fit":
        ladder = Ladder(n_values=tuple(int(v) for v in p.get(
            "n_values", [32, 64, 128, 256, 512, 1024, 2048])),
            replicates=int(p.get("replicates", 200)))
        fit = fit_theta(estimate_medians(config.d, config.beta, ladder,
                                         config.seed, jobs=config.jobs))
        theta = fit.theta_hat
        files.extend(_scaling_outputs(config, out_dir, written, fit))
    else:
        raise ConfigError("theta_source must be 'fit' or 'manual'")
    paths = []
    m = 3 * n
    for r in range(n_geo):
        cfg = ModelConfig(d=config.d, beta=config.beta, n=m,
                          seed=config.seed)
        g = sample_graph(cfg, stream_id=(77001, r))
        x = int(g.index(tuple([n] * config.d)))
        y = int(g.index(tuple([2 * n] * config.d)))
        dag = geodesic_dag(g, x, y)
        rng = RngStream(config.seed, (77002, r)).generator()
        paths.append(g.coords(np.asarray(sample_geodesic(dag, rng))))
    deltas = [2.0 ** -j for j in scales]
    fitd = mean_dimension_fit(paths, deltas, float(n))
    dim_csv = _target(out_dir, written, "dim.csv")
    write_csv(dim_csv, ["delta", "mean_N", "log_inv_delta", "log_N",
                        "slope"],
              [(deltas[i], math.exp(fitd.log_counts[i]),
                fitd.log_inv_delta[i], fitd.log_counts[i], fitd.dim_hat)
               for i in range(len(deltas))])
    summary = _target(out_dir, written, "dim.json")
    write_json(summary, {"dim_hat": fitd.dim_hat,
                         "r_squared": fitd.r_squared,
                         "theta": theta, "n": n, "geodesics": n_geo,
                         "abs_difference": abs(fitd.dim_hat - theta)})
    return files + [dim_csv, summary], n_geo * 2


def _run_goodcubes(config: ExperimentConfig, out_dir: Path, written: list):
    p = config.params
    s = int(p.get("s", 32))
    alphas = [float(a) for a in p.get("alphas", [0.5, 0.25, 0.1])]
    b = float(p.get("b", 0.25))
    theta = float(p.get("theta", 0.45))
    replicates = int(p.get("replicates", 400))
    if "a_s" in p:
        a_s = float(p["a_s"])
    else:
        reps = int(p.get("a_s_replicates", 200))
        from .scaling import sample_distances
        a_s = float(np.median(sample_distances(
            config.d, config.beta, s, reps, config.seed, ladder_index=999)))
    rows = []
    for alpha in sorted(alphas, reverse=True):
        params = GoodCubeParams(alpha=alpha, b=b, theta=theta)
        rate = good_cube_rate(config.d, config.beta, s, params, a_s,
                              replicates, config.seed)
        rows.append((alpha, b, rate.rate, rate.ci_lo, rate.ci_hi))
    path = _target(out_dir, written, "goodcubes.csv")
    write_csv(path, ["alpha", "b", "rate", "ci_lo", "ci_hi"], rows)
    meta = _target(out_dir, written, "goodcubes.json")
    write_json(meta, {"s": s, "a_s": a_s, "theta": theta,
                      "replicates": replicates})
    growth = connected_set_growth(
        config.d, config.beta, n=int(p.get("cs_n", 16 * s)), s=s,
        k=int(p.get("cs_k", 5)),
        replicates=int(p.get("cs_replicates", 100)), seed=config.seed)
    cs_path = _target(out_dir, written, "cs_counts.csv")
    write_csv(cs_path, ["k", "mean", "bound"],
              [(k + 1, growth.cs_means[k], growth.cs_bound[k])
               for k in range(len(growth.cs_means))])
    return [path, meta, cs_path], len(alphas) * replicates


def _run_sperner(config: ExperimentConfig, out_dir: Path, written: list):
    p = config.params
    n_values = [int(n) for n in p.get("n_values", list(range(4, 21)))]
    per_n = int(p.get("families_per_n", 100))
    p_values = [Fraction(str(x)) for x in p.get("p_values",
                                                ["1/4", "1/2", "3/4"])]
    kind = p.get("generator", "antichain-low")
    rows = []
    for n in n_values:
        rng = RngStream(config.seed, (77011, n)).generator()
        worst_lym = Fraction(0)
        chains_hold = True
        for _ in range(per_n):
            fam = generate_family(kind, n, rng,
                                  target_size=p.get("target_size"))
            for pv in p_values:
                chain = sperner_bound_check(fam, pv)
                chains_hold &= chain.holds
                worst_lym = max(worst_lym, chain.lym)
        rows.append((n, per_n, float(worst_lym), int(chains_hold)))
    path = _target(out_dir, written, "sperner.csv")
    write_csv(path, ["n", "families", "max_lym", "all_chains_hold"], rows)
    return [path], len(n_values)


def _run_firework(config: ExperimentConfig, out_dir: Path, written: list):
    p = config.params
    eps = float(p.get("eps", 1e-9))
    theta = float(p.get("theta", 0.5))
    c_star1 = float(p.get("c_star1", 0.5))
    c2 = float(p.get("c2", 1.0))
    runs = int(p.get("runs", 10 ** 5))
    k_min, k_max = int(p.get("k_min", 2)), int(p.get("k_max", 12))
    ladder = build_ladder(eps, theta, c_star1)
    ladder_json = _target(out_dir, written, "ladder.json")
    write_json(ladder_json, {
        "eps": eps, "theta": theta, "c_star1": c_star1, "K": ladder.K,
        "N": ladder.N, "M": [float(x) for x in ladder.M[1:]],
        "r": [float(x) for x in ladder.r[1:]],
        "delta_max": ladder.delta_max})
    cp = compute_crossing_probs(ladder, config.beta)
    crossing = _target(out_dir, written, "crossing.csv")
    write_csv(crossing, ["i", "p_gap_jump", "p_shell_cross"],
              [(i + 1, cp.p_gap[i], cp.p_shell[i])
               for i in range(ladder.K)])
    model = FireworkModel.default(k_max, c2=c2)
    rng = RngStream(config.seed, (77021,)).generator()
    rt = reach_tail(model, range(k_min, k_max + 1), runs, rng)
    variant = p.get("mk_variant", "max")
    if variant == "max":
        tail = rt.tail
    elif variant == "min":
        # literal-min stopping index: coverage is an interval, so the
        # smallest covered positive site is 1 whenever anything spreads;
        # the tail collapses to P[nothing spreads] for k >= 2
        from .firework import simulate_firework
        out = simulate_firework(model, RngStream(
            config.seed, (77022,)).generator(), runs=runs)
        p_none = float((out.reaches == 0).mean())
        tail = np.array([1.0 if k <= 1 else p_none for k in rt.ks])
    else:
        raise ConfigError("mk_variant must be 'max' or 'min'")
    fw = _target(out_dir, written, "firework.csv")
    write_csv(fw, ["k", "tail", "kappa_hat", "r_squared"],
              [(int(k), tail[i], rt.kappa_hat, rt.r_squared)
               for i, k in enumerate(rt.ks)])
    return [ladder_json, crossing, fw], 1


def _run_xi_coupling(config: ExperimentConfig, out_dir: Path, written: list):
    p = config.params
    eps = float(p.get("eps", 1e-12))
    theta = float(p.get("theta", 0.5))
    c_star1 = float(p.get("c_star1", 0.5))
    beta = float(p.get("beta", config.beta))
    resolution = int(p.get("resolution", 8))
    runs = int(p.get("runs", 10 ** 4))
    max_size = p.get("max_subset_size")
    ladder = build_ladder(eps, theta, c_star1)
    xi = simulate_xi_vector(ladder, beta, resolution,
                            RngStream(config.seed, (77031,)).generator(),
                            runs=runs)
    marginals = _target(out_dir, written, "xi_marginals.csv")
    cp = compute_crossing_probs(ladder, beta)
    emp = xi.marginal_zero_rate()
    write_csv(marginals, ["i", "empirical_cross_rate", "exact_cross_prob"],
              [(i + 1, emp[i], cp.p_shell[i]) for i in range(ladder.K)])
    subsets = None
    if max_size is not None:
        subsets = [tuple(i + 1 for i in range(ladder.K) if m >> i & 1)
                   for m in range(1, 1 << ladder.K)]
        subsets = [S for S in subsets if len(S) <= int(max_size)]
    checks = coupling_checks(ladder, beta, xi, runs_fw=runs,
                             rng=RngStream(config.seed,
                                           (77032,)).generator(),
                             subsets=subsets)
    coupling = _target(out_dir, written, "coupling.csv")
    write_csv(coupling, ["subset", "k", "w_empirical", "firework_tail",
                         "sigma", "holds"],
              [("|".join(map(str, c.subset)), len(c.subset), c.w_empirical,
                c.fw_tail, c.sigma, int(c.holds)) for c in checks])
    return [marginals, coupling], 2


_RUNNERS = {
    "sample": _run_sample,
    "scaling": _run_scaling,
    "dim": _run_dim,
    "goodcubes": _run_goodcubes,
    "sperner": _run_sperner,
    "firework": _run_firework,
    "xi-coupling": _run_xi_coupling,
}


# ---------------------------------------------------------------------------
# report


def verify_run(out_dir) -> dict:
    """Load the manifest and verify every recorded checksum."""
    out_dir = Path(out_dir)
    manifest_path = out_dir / "manifest.json"
    if not manifest_path.exists():
        raise IntegrityError(f"no manifest in {out_dir}")
    with open(manifest_path) as fh:
        manifest = json.load(fh)
    if manifest.get("status") != "complete":
        raise IntegrityError(f"run status is {manifest.get('status')!r}")
    for name, digest in manifest.get("outputs", {}).items():
        path = out_dir / name
        if not path.exists():
            raise IntegrityError(f"missing output file: {name}")
        if sha256_file(path) != digest:
            raise IntegrityError(f"checksum mismatch: {name}")
    return manifest


def _read_csv(path: Path) -> tuple[list[str], list[list[str]]]:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        rows = [line.strip().split(",") for line in fh if line.strip()]
    return header, rows


def report(out_dir) -> list[Path]:
    """Emit a human-readable summary and per-figure (x, y, ci) TSVs."""
    out_dir = Path(out_dir)
    manifest = verify_run(out_dir)
    kind = manifest["kind"]
    produced = []
    lines = [f"experiment: {kind}", f"status: {manifest['status']}",
             f"code_version: {manifest['code_version']}"]
    if kind in ("scaling", "dim") and (out_dir / "medians.csv").exists():
        header, rows = _read_csv(out_dir / "medians.csv")
        fig = out_dir / "figure_scaling.tsv"
        with open(fig, "w", newline="\n") as fh:
            fh.write("x\ty\tci_lo\tci_hi\n")
            for row in rows:
                n, a_n, lo, hi = (float(row[0]), float(row[1]),
                                  float(row[2]), float(row[3]))
                fh.write("\t".join(fmt(v) for v in (
                    math.log(n), math.log(a_n),
                    math.log(max(lo, 1e-300)),
                    math.log(max(hi, 1e-300)))) + "\n")
        produced.append(fig)
        with open(out_dir / "theta.json") as fh:
            theta = json.load(fh)
        lines.append(f"theta_hat = {theta['theta_hat']}, "
                     f"r2 = {theta['r_squared']}, ci = {theta['ci']}")
    if kind == "dim":
        header, rows = _read_csv(out_dir / "dim.csv")
        fig = out_dir / "figure_dim.tsv"
        with open(fig, "w", newline="\n") as fh:
            fh.write("x\ty\tci_lo\tci_hi\n")
            for row in rows:
                x, y = float(row[2]), float(row[3])
                fh.write("\t".join(fmt(v) for v in (x, y, y, y)) + "\n")
        produced.append(fig)
        with open(out_dir / "dim.json") as fh:
            dimj = json.load(fh)
        lines.append(f"dim_hat = {dimj['dim_hat']} vs theta = "
                     f"{dimj['theta']} (|diff| = {dimj['abs_difference']})")
    if kind == "goodcubes":
        header, rows = _read_csv(out_dir / "goodcubes.csv")
        fig = out_dir / "figure_goodcubes.tsv"
        with open(fig, "w", newline="\n") as fh:
            fh.write("x\ty\tci_lo\tci_hi\n")
            for row in rows:
                fh.write("\t".join(row[0:1] + row[2:5]) + "\n")
        produced.append(fig)
        lines.append("good-cube rates: " + "; ".join(
            f"alpha={r[0]}: {r[2]}" for r in rows))
    if kind == "firework":
        header, rows = _read_csv(out_dir / "firework.csv")
        fig = out_dir / "figure_firework.tsv"
        with open(fig, "w", newline="\n") as fh:
            fh.write("x\ty\tci_lo\tci_hi\n")
            for row in rows:
                k, tail = float(row[0]), float(row[1])
                fh.write("\t".join(fmt(v) for v in (k, tail, tail, tail))
                         + "\n")
        produced.append(fig)
        lines.append(f"kappa_hat = {rows[0][2]}, r2 = {rows[0][3]}")
    if kind == "xi-coupling":
        header, rows = _read_csv(out_dir / "coupling.csv")
        holds = all(row[5] == "1" for row in rows)
        lines.append(f"coupling inequality holds on all subsets: {holds}")
    summary = out_dir / "summary.txt"
    with open(summary, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")
    produced.append(summary)
    return produced
