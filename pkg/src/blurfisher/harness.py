"""Rating-manifest ingestion, score-scale conversion, model fitting and
report generation.

Each subjective-quality database ships in its own format; they are
normalized into one CSV schema per dataset (see MANIFEST_COLUMNS) before
the harness sees them.  The harness converts every score to a 0-100
quality-loss scale, resolves a blur spread for every row (given directly,
converted from a pixel sigma, or estimated from an image pair), fits the
scaled discomfort index per dataset by regression, and emits scatter and
summary artifacts.
"""

from __future__ import annotations

import csv
import json
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ._optimize import golden_section_minimize
from .discomfort import sbdi_values
from .errors import DomainError, EstimationError, FitError, ManifestError, ShapeError
from .estimator import estimate_blur_sigma
from .geometry import (
    DEFAULT_CONVENTION,
    RetinalGeometry,
    SpreadConvention,
    blur_sigma_px_to_spread_arcmin,
)

MANIFEST_COLUMNS = (
    "dataset", "image_id", "ref_id", "blur_sigma_px", "blur_spread_arcmin",
    "score", "score_scale", "group", "image_path", "ref_path",
)

SCORE_SCALES = ("dmos_0_100", "mos_0_9", "thurstone")


@dataclass(frozen=True)
class ManifestRow:
    dataset: str
    image_id: str
    ref_id: str | None
    blur_sigma_px: float | None
    blur_spread_arcmin: float | None
    score: float
    score_scale: str
    group: str | None
    image_path: str | None
    ref_path: str | None


@dataclass(frozen=True)
class RatingManifest:
    rows: tuple

    @classmethod
    def from_rows(cls, rows) -> "RatingManifest":
        return cls(tuple(rows))

    @classmethod
    def from_csv(cls, path) -> "RatingManifest":
        rows = []
        with open(path, "r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            missing = set(MANIFEST_COLUMNS) - set(reader.fieldnames or ())
            if missing:
                raise ManifestError(f"{path}: missing columns {sorted(missing)}")
            for lineno, rec in enumerate(reader, 2):
                rows.append(_parse_row(rec, f"{path}:{lineno}"))
        return cls(tuple(rows))

    @classmethod
    def from_csvs(cls, paths) -> "RatingManifest":
        rows = []
        for p in paths:
            rows.extend(cls.from_csv(p).rows)
        return cls(tuple(rows))

    def datasets(self) -> list[str]:
        seen = []
        for r in self.rows:
            if r.dataset not in seen:
                seen.append(r.dataset)
        return seen


def _parse_row(rec: dict, where: str) -> ManifestRow:
    def get(key):
        v = (rec.get(key) or "").strip()
        return v or None

    def getf(key):
        v = get(key)
        if v is None:
            return None
        try:
            out = float(v)
        except ValueError:
            raise ManifestError(f"{where}: bad number for {key}: {v!r}") from None
        if not math.isfinite(out):
            raise ManifestError(f"{where}: non-finite {key}")
        return out

    dataset = get("dataset")
    image_id = get("image_id")
    if not dataset or not image_id:
        raise ManifestError(f"{where}: dataset and image_id are required")
    score = getf("score")
    if score is None:
        raise ManifestError(f"{where}: score is required")
    scale = get("score_scale")
    if scale not in SCORE_SCALES:
        raise ManifestError(f"{where}: score_scale must be one of {SCORE_SCALES}")
    sigma_px = getf("blur_sigma_px")
    spread = getf("blur_spread_arcmin")
    image_path, ref_path = get("image_path"), get("ref_path")
    if sigma_px is not None and spread is not None:
        raise ManifestError(f"{where}: give blur_sigma_px or blur_spread_arcmin, not both")
    if sigma_px is None and spread is None and not (image_path and ref_path):
        raise ManifestError(f"{where}: no blur value and no image pair to estimate it from")
    return ManifestRow(
        dataset=dataset, image_id=image_id, ref_id=get("ref_id"),
        blur_sigma_px=sigma_px, blur_spread_arcmin=spread,
        score=score, score_scale=scale, group=get("group"),
        image_path=image_path, ref_path=ref_path,
    )


# ---------------------------------------------------------------------------
# score-scale conversions

def mos_to_dmos_tid(mos):
    """Quality scores on the 0-9 "higher is better" scale to 0-100 loss.

    (100/7.5) * (7.5 - mos): the best observed ratings top out near 7.5,
    which maps to zero loss; anything above clamps to 0.
    """
    out = (100.0 / 7.5) * (7.5 - np.asarray(mos, dtype=float))
    out = np.maximum(out, 0.0)
    return float(out) if np.isscalar(mos) else out


def thurstone_to_sbdi_scale(t):
    """Paired-comparison (Thurstone) discomfort units to the 0-100 scale:
    50 * (t + 1)."""
    out = 50.0 * (np.asarray(t, dtype=float) + 1.0)
    return float(out) if np.isscalar(t) else out


def normalize_dmos_minmax(scores):
    """Affine map of [min, max] onto [0, 100]."""
    arr = np.asarray(scores, dtype=float)
    lo, hi = float(arr.min()), float(arr.max())
    if not hi > lo:
        raise DomainError("scores are constant; min-max normalization undefined")
    return (arr - lo) * (100.0 / (hi - lo))


def plcc(x, y) -> float:
    """Sample Pearson linear correlation coefficient."""
    a = np.asarray(x, dtype=float)
    b = np.asarray(y, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < 2:
        raise DomainError("need at least two points")
    da = a - a.mean()
    db = b - b.mean()
    na, nb = np.sqrt(np.sum(da ** 2)), np.sqrt(np.sum(db ** 2))
    if na == 0 or nb == 0:
        raise DomainError("constant sequence has no correlation")
    return float(np.sum(da * db) / (na * nb))


def rmse(x, y) -> float:
    a = np.asarray(x, dtype=float)
    b = np.asarray(y, dtype=float)
    if a.shape != b.shape:
        raise ShapeError(f"length mismatch: {a.shape} vs {b.shape}")
    if a.size < 1:
        raise ShapeError("need at least one point")
    return float(np.sqrt(np.mean((a - b) ** 2)))


# ---------------------------------------------------------------------------
# fitting

@dataclass(frozen=True)
class FitResult:
    gain: float
    gamma: float
    plcc: float
    rmse: float
    n: int

    def __post_init__(self):
        if self.n < 3:
            raise FitError("a two-parameter fit needs at least 3 rows")
        if self.rmse < 0:
            raise FitError("rmse must be non-negative")

    @property
    def delta_ratio(self) -> float:
        """Actual/nominal viewing distance, 1/gamma."""
        return 1.0 / self.gamma


def fit_sbdi_params(spreads, scores, neural_spread: float,
                    gamma_bounds=(0.2, 5.0), coarse_points: int = 65) -> FitResult:
    """Least-squares fit of (gain, gamma) to scores over blur spreads.

    For fixed gamma the gain is the closed-form linear least-squares
    solution, so only gamma needs searching: a coarse scan over
    log(gamma) picks a bracket and golden-section refines it.
    """
    s = np.asarray(spreads, dtype=float)
    sc = np.asarray(scores, dtype=float)
    if s.shape != sc.shape:
        raise ShapeError("spreads and scores differ in length")
    if s.size < 3 or np.unique(s).size < 3:
        raise FitError("need at least 3 rows with distinct blur levels")
    if not (neural_spread > 0):
        raise DomainError("neural spread must be positive")
    if np.any(s < 0):
        raise DomainError("blur spreads must be non-negative")

    xi = s / neural_spread

    def gain_for(gamma):
        e = 1.0 - 1.0 / np.sqrt(1.0 + (gamma ** 2 * xi) ** 2)
        e2 = np.sum(e ** 2)
        if e2 <= 0:
            return None, e
        return float(np.sum(sc * e) / e2), e

    def sse(lg):
        a, e = gain_for(math.exp(lg))
        if a is None or a <= 0:
            return float(np.sum(sc ** 2)) * 4.0 + 1.0
        return float(np.sum((sc - a * e) ** 2))

    lo, hi = math.log(gamma_bounds[0]), math.log(gamma_bounds[1])
    grid = np.linspace(lo, hi, coarse_points)
    vals = [sse(g) for g in grid]
    best = int(np.argmin(vals))
    blo = grid[max(best - 1, 0)]
    bhi = grid[min(best + 1, coarse_points - 1)]
    lg, _ = golden_section_minimize(sse, blo, bhi, tol=1e-12)
    gamma = math.exp(lg)
    gain, e = gain_for(gamma)
    if gain is None or gain <= 0 or not math.isfinite(gain):
        raise FitError("degenerate design: no positive gain fits these scores")
    pred = gain * e
    try:
        r = plcc(sc, pred)
    except DomainError as exc:
        raise FitError(f"fit produced a constant prediction: {exc}") from exc
    return FitResult(gain=gain, gamma=gamma, plcc=r,
                     rmse=rmse(sc, pred), n=int(s.size))


def fit_scale_params(manifest: RatingManifest, neural_spread: float,
                     conv: SpreadConvention = DEFAULT_CONVENTION,
                     options: "EvalOptions | None" = None) -> FitResult:
    """Resolve one dataset's rows and fit the index to its scores."""
    options = options or EvalOptions()
    names = manifest.datasets()
    if len(names) != 1:
        raise FitError(f"expected a single-dataset manifest, found {names}")
    resolved = _resolve_dataset(list(manifest.rows), conv, options)
    if len(resolved.spreads) < 3:
        raise FitError(f"only {len(resolved.spreads)} usable rows")
    return fit_sbdi_params(resolved.spreads, resolved.scores, neural_spread,
                           options.gamma_bounds)


# ---------------------------------------------------------------------------
# evaluation run

@dataclass(frozen=True)
class EvalOptions:
    images_root: str | None = None
    reg: float = 1e-3
    normalize_minmax: tuple = ("CSIQ",)
    receptors_per_degree: float = 60.0
    gamma_bounds: tuple = (0.2, 5.0)
    threads: int | None = None

    def thread_count(self) -> int:
        if self.threads is not None:
            return max(1, int(self.threads))
        env = os.environ.get("BLURFISHER_THREADS")
        if env:
            try:
                return max(1, int(env))
            except ValueError:
                pass
        return min(4, os.cpu_count() or 1)


@dataclass
class _Resolved:
    rows: list
    spreads: np.ndarray
    scores: np.ndarray
    skipped: list
    n_clamped: int
    estimated_sigmas: dict


@dataclass
class DatasetReport:
    name: str
    fit: FitResult | None
    error: str | None
    n_rows: int
    n_used: int
    n_clamped: int
    skipped: list
    scatter: list            # (score, sbdi_pred, spread_norm, group)
    group_averages: list     # (group, spread, mean_score, mean_pred, count)
    group_sigma_medians: list


@dataclass
class EvaluationReport:
    datasets: dict
    pooled_plcc: float | None
    pooled_rmse: float | None
    pooled_n: int
    neural_spread: float

    def to_json_dict(self) -> dict:
        out = {
            "neural_spread_arcmin": self.neural_spread,
            "pooled": {"plcc": self.pooled_plcc, "rmse": self.pooled_rmse,
                       "n": self.pooled_n},
            "datasets": {},
        }
        for name, rep in self.datasets.items():
            entry = {
                "rows": rep.n_rows,
                "used": rep.n_used,
                "clamped_scores": rep.n_clamped,
                "skipped": [{"image_id": i, "reason": r} for i, r in rep.skipped],
            }
            if rep.fit is not None:
                entry["fit"] = {
                    "gain": rep.fit.gain,
                    "gamma": rep.fit.gamma,
                    "delta_over_delta0": rep.fit.delta_ratio,
                    "plcc": rep.fit.plcc,
                    "rmse": rep.fit.rmse,
                    "n": rep.fit.n,
                }
            if rep.error is not None:
                entry["error"] = rep.error
            if rep.group_sigma_medians:
                entry["group_sigma_px_medians"] = {
                    g: m for g, m in rep.group_sigma_medians}
            out["datasets"][name] = entry
        return out

    @property
    def any_failed(self) -> bool:
        return any(rep.fit is None for rep in self.datasets.values())


def _convert_score(row: ManifestRow):
    if row.score_scale == "dmos_0_100":
        return row.score, 0
    if row.score_scale == "mos_0_9":
        return mos_to_dmos_tid(row.score), int(row.score > 7.5)
    return thurstone_to_sbdi_scale(row.score), 0


def _resolve_dataset(rows, conv: SpreadConvention, options: EvalOptions) -> _Resolved:
    geometry = RetinalGeometry(1, 1, options.receptors_per_degree)
    root = Path(options.images_root) if options.images_root else None

    def locate(p):
        path = Path(p)
        if not path.is_absolute() and root is not None:
            path = root / path
        return path

    # estimate missing blur values from image pairs, in parallel
    need_estimate = [i for i, r in enumerate(rows)
                     if r.blur_sigma_px is None and r.blur_spread_arcmin is None]
    estimates: dict[int, object] = {}
    if need_estimate:
        from .imageio import read_luminance

        def work(i):
            r = rows[i]
            try:
                ref = read_luminance(locate(r.ref_path))
                blr = read_luminance(locate(r.image_path))
                return i, estimate_blur_sigma(ref, blr, reg=options.reg)
            except (OSError, EstimationError, ShapeError, DomainError) as exc:
                return i, exc

        with ThreadPoolExecutor(max_workers=options.thread_count()) as pool:
            for i, res in pool.map(work, need_estimate):
                estimates[i] = res

    used_rows, spreads, scores, skipped = [], [], [], []
    n_clamped = 0
    estimated_sigmas: dict[str, list] = {}
    for i, row in enumerate(rows):
        if row.blur_spread_arcmin is not None:
            spread = row.blur_spread_arcmin
        else:
            sigma = row.blur_sigma_px
            if sigma is None:
                res = estimates.get(i)
                if not hasattr(res, "sigma_px"):
                    skipped.append((row.image_id, f"blur estimation failed: {res}"))
                    continue
                sigma = res.sigma_px
                estimated_sigmas.setdefault(row.group or "", []).append(sigma)
            spread = blur_sigma_px_to_spread_arcmin(sigma, geometry, conv)
        score, clamped = _convert_score(row)
        n_clamped += clamped
        used_rows.append(row)
        spreads.append(spread)
        scores.append(score)

    scores_arr = np.asarray(scores, dtype=float)
    ds_names = {r.dataset for r in used_rows}
    norm = {n.lower() for n in options.normalize_minmax}
    if ds_names and ds_names.pop().lower() in norm and scores_arr.size >= 2:
        try:
            scores_arr = normalize_dmos_minmax(scores_arr)
        except DomainError:
            pass  # constant scores; the fit will reject the dataset anyway
    return _Resolved(rows=used_rows, spreads=np.asarray(spreads, dtype=float),
                     scores=scores_arr, skipped=skipped, n_clamped=n_clamped,
                     estimated_sigmas=estimated_sigmas)


def run_evaluation(manifest: RatingManifest, neural_spread: float,
                   conv: SpreadConvention = DEFAULT_CONVENTION,
                   options: EvalOptions | None = None) -> EvaluationReport:
    """Fit every dataset in the manifest and assemble the report.

    Rows whose blur cannot be resolved are skipped with a logged reason;
    datasets with fewer than 3 usable rows are skipped as a whole.  Pooled
    metrics concatenate the per-dataset predictions (each dataset keeps
    its own fitted gain and gamma).
    """
    options = options or EvalOptions()
    reports: dict[str, DatasetReport] = {}
    pooled_scores, pooled_preds = [], []

    for name in manifest.datasets():
        rows = [r for r in manifest.rows if r.dataset == name]
        resolved = _resolve_dataset(rows, conv, options)
        rep = DatasetReport(name=name, fit=None, error=None,
                            n_rows=len(rows), n_used=len(resolved.rows),
                            n_clamped=resolved.n_clamped,
                            skipped=resolved.skipped, scatter=[],
                            group_averages=[], group_sigma_medians=[])
        reports[name] = rep
        if len(resolved.rows) < 3:
            rep.error = f"only {len(resolved.rows)} usable rows; dataset skipped"
            continue
        try:
            fit = fit_sbdi_params(resolved.spreads, resolved.scores,
                                  neural_spread, options.gamma_bounds)
        except (FitError, DomainError) as exc:
            rep.error = f"fit failed: {exc}"
            continue
        rep.fit = fit
        preds = sbdi_values(resolved.spreads, fit.gain, fit.gamma, neural_spread)
        pooled_scores.extend(resolved.scores.tolist())
        pooled_preds.extend(np.asarray(preds).tolist())
        xi = resolved.spreads / neural_spread
        rep.scatter = [
            (float(s), float(p), float(x), row.group or "")
            for s, p, x, row in zip(resolved.scores, preds, xi, resolved.rows)
        ]
        rep.group_averages = _group_averages(resolved, preds)
        rep.group_sigma_medians = sorted(
            (g, float(np.median(v))) for g, v in resolved.estimated_sigmas.items())

    pooled_plcc = pooled_rmse = None
    if len(pooled_scores) >= 2:
        try:
            pooled_plcc = plcc(pooled_scores, pooled_preds)
        except DomainError:
            pooled_plcc = None
        pooled_rmse = rmse(pooled_scores, pooled_preds)
    return EvaluationReport(datasets=reports, pooled_plcc=pooled_plcc,
                            pooled_rmse=pooled_rmse, pooled_n=len(pooled_scores),
                            neural_spread=neural_spread)


def _group_averages(resolved: _Resolved, preds) -> list:
    keys = {}
    for row, spread, score, pred in zip(resolved.rows, resolved.spreads,
                                        resolved.scores, np.asarray(preds)):
        if row.group is None:
            continue
        keys.setdefault((row.group, float(spread)), []).append((float(score), float(pred)))
    out = []
    for (group, spread), pairs in sorted(keys.items()):
        ss = [p[0] for p in pairs]
        pp = [p[1] for p in pairs]
        out.append((group, spread, float(np.mean(ss)), float(np.mean(pp)), len(pairs)))
    return out


def write_report(report: EvaluationReport, out_dir):
    """Write report.json, one scatter CSV per dataset, and table1.csv."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(out / "report.json", "w", encoding="utf-8") as fh:
        json.dump(report.to_json_dict(), fh, indent=2, sort_keys=True)
        fh.write("\n")
    for name, rep in report.datasets.items():
        safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in name)
        with open(out / f"scatter_{safe}.csv", "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["score", "sbdi_pred", "spread_norm", "group"])
            for row in rep.scatter:
                writer.writerow([f"{row[0]:.6g}", f"{row[1]:.6g}", f"{row[2]:.6g}", row[3]])
    with open(out / "table1.csv", "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["dataset", "gain", "gamma", "delta_over_delta0",
                         "plcc", "rmse", "n"])
        for name, rep in report.datasets.items():
            if rep.fit is None:
                writer.writerow([name, "", "", "", "", "", 0])
            else:
                f = rep.fit
                writer.writerow([name, f"{f.gain:.4g}", f"{f.gamma:.4g}",
                                 f"{f.delta_ratio:.4g}", f"{f.plcc:.4g}",
                                 f"{f.rmse:.4g}", f.n])
        if report.pooled_plcc is not None:
            writer.writerow(["ALL", "", "", "", f"{report.pooled_plcc:.4g}",
                             f"{report.pooled_rmse:.4g}", report.pooled_n])
