"""Dataset orchestration: baseline/inspection runs over manifests, ROC sweeps
and appendix-style summary tables.

A dataset is described by a manifest file: a key-value header (sample rate,
baseline label, named packet windows, optional verdict band) followed by a
CSV body with one row per signal file::

    sample_rate = 24000000.0
    baseline_label = healthy
    band = 150000.0,350000.0
    window.first-packet = 1200,500
    window.full = 0,8000
    file,label,path_id,set_id
    signals/baseline_000.csv,healthy,1-2,set0

Baselines are scoped by ``set_id``: every inspection signal is judged against
the ensemble built from its own set's healthy records.

Two reference protocols coexist, mirroring how many test cases each metric
produces.  The ensemble metrics (``fm``, ``z``) yield one verdict per
inspection signal.  The pairwise metrics (``f`` and the two damage indices)
consume an explicit reference signal, so every (reference, inspection) ordered
pair is a test case; held-out healthy signals provide the false-alarm pairs
(all ordered in-train pairs when nothing is held out).
"""

import math
import warnings
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dataio import fmt, read_signal
from .detectors import (
    DAMAGED,
    HEALTHY,
    BaselineEnsemble,
    _band_mask,
    f_statistic,
    fm_statistic,
    janapati_di,
    qiu_di,
    z_statistic,
)
from .spectral import Signal, WelchConfig, welch_psd
from .statdist import f_quantile, normal_quantile, validate_alpha

__all__ = [
    "METRICS",
    "ManifestEntry",
    "DatasetManifest",
    "ScoredCase",
    "PathScores",
    "MetricSummary",
    "DetectionReport",
    "RocCurve",
    "locate_packet",
    "extract_packet",
    "run_baseline",
    "compute_path_scores",
    "case_damaged",
    "case_score",
    "run_inspection",
    "roc_sweep",
    "score_roc",
    "default_alpha_grid",
    "summary_table",
]

METRICS = ("f", "fm", "z", "janapati", "qiu")
_PAIR_METRICS = ("f", "janapati", "qiu")
_DI_METRICS = ("janapati", "qiu")
_HEADER = "file,label,path_id,set_id"


@dataclass(frozen=True)
class ManifestEntry:
    file: str
    label: str
    path_id: str
    set_id: str


@dataclass
class DatasetManifest:
    """Index of one dataset: signal files, windows and analysis defaults."""

    entries: list
    sample_rate: float
    baseline_label: str = "healthy"
    packet_windows: dict = field(default_factory=dict)
    band: tuple = None
    base_dir: Path = Path(".")

    def __post_init__(self):
        self.entries = [e if isinstance(e, ManifestEntry) else ManifestEntry(*e)
                        for e in self.entries]
        self.sample_rate = float(self.sample_rate)
        if self.sample_rate <= 0:
            raise ValueError("sample_rate must be > 0")
        self.packet_windows = {
            str(name): (int(start), int(length))
            for name, (start, length) in self.packet_windows.items()
        }
        for name, (start, length) in self.packet_windows.items():
            if start < 0 or length < 1:
                raise ValueError(f"window {name!r}: bad range ({start}, {length})")
        if self.band is not None:
            self.band = (float(self.band[0]), float(self.band[1]))
        self.base_dir = Path(self.base_dir)

    def validate(self) -> None:
        """Every path must come with at least one baseline entry."""
        for path in self.paths():
            if not any(e.label == self.baseline_label and e.path_id == path
                       for e in self.entries):
                raise ValueError(f"path {path!r} has no baseline entry")

    def paths(self):
        seen = []
        for e in self.entries:
            if e.path_id not in seen:
                seen.append(e.path_id)
        return seen

    def sets_for(self, path: str):
        seen = []
        for e in self.entries:
            if e.path_id == path and e.set_id not in seen:
                seen.append(e.set_id)
        return seen

    def entries_for(self, path: str, set_id: str = None, label: str = None):
        out = [e for e in self.entries if e.path_id == path]
        if set_id is not None:
            out = [e for e in out if e.set_id == set_id]
        if label is not None:
            out = [e for e in out if e.label == label]
        return out

    def resolve(self, entry: ManifestEntry) -> Path:
        return self.base_dir / entry.file

    def load_entry(self, entry: ManifestEntry) -> Signal:
        sig = read_signal(self.resolve(entry))
        if sig.sample_rate != self.sample_rate:
            raise ValueError(
                f"{entry.file}: sample rate {sig.sample_rate:g} Hz does not match "
                f"the manifest's {self.sample_rate:g} Hz"
            )
        return Signal(samples=sig.samples, sample_rate=sig.sample_rate,
                      label=entry.label)

    def save(self, path) -> Path:
        path = Path(path)
        lines = [
            f"sample_rate = {fmt(self.sample_rate)}",
            f"baseline_label = {self.baseline_label}",
        ]
        if self.band is not None:
            lines.append(f"band = {fmt(self.band[0])},{fmt(self.band[1])}")
        for name in sorted(self.packet_windows):
            start, length = self.packet_windows[name]
            lines.append(f"window.{name} = {start},{length}")
        lines.append(_HEADER)
        lines.extend(f"{e.file},{e.label},{e.path_id},{e.set_id}" for e in self.entries)
        path.write_text("\n".join(lines) + "\n")
        return path

    @classmethod
    def load(cls, path) -> "DatasetManifest":
        path = Path(path)
        meta = {}
        windows = {}
        entries = []
        in_body = False
        for ln, raw in enumerate(path.read_text().splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if line == _HEADER:
                in_body = True
                continue
            if in_body:
                parts = line.split(",")
                if len(parts) != 4:
                    raise ValueError(f"{path}:{ln}: expected 4 CSV fields, got {len(parts)}")
                entries.append(ManifestEntry(*[p.strip() for p in parts]))
            else:
                if "=" not in line:
                    raise ValueError(f"{path}:{ln}: expected 'key = value' before the CSV header")
                key, value = (s.strip() for s in line.split("=", 1))
                if key.startswith("window."):
                    start, length = (s.strip() for s in value.split(","))
                    windows[key[len("window."):]] = (int(start), int(length))
                else:
                    meta[key] = value
        if "sample_rate" not in meta:
            raise ValueError(f"{path}: missing 'sample_rate' key")
        if not entries:
            raise ValueError(f"{path}: no entries after the CSV header")
        band = None
        if "band" in meta:
            lo, hi = (float(s) for s in meta["band"].split(","))
            band = (lo, hi)
        manifest = cls(
            entries=entries,
            sample_rate=float(meta["sample_rate"]),
            baseline_label=meta.get("baseline_label", "healthy"),
            packet_windows=windows,
            band=band,
            base_dir=path.parent,
        )
        manifest.validate()
        return manifest


# ---------------------------------------------------------------------------
# packet windowing
# ---------------------------------------------------------------------------

def locate_packet(signal: Signal, threshold: float = 0.1, smooth: int = 96) -> int:
    """Onset of the first wave packet via a short-time energy envelope.

    The packet is found where the centered moving-average energy first
    crosses ``threshold`` times its maximum; the onset is then refined by
    backtracking to the last sample at the quiet floor (a thousandth of the
    peak, or twice the median noise level, whichever is larger) and advancing
    a quarter window to offset the average's early rise.
    """
    if not 0.0 < float(threshold) <= 1.0:
        raise ValueError(f"threshold must lie in (0, 1], got {threshold}")
    x = signal.samples
    w = max(4, int(smooth))
    env = np.convolve(x * x, np.ones(w) / w, mode="same")
    peak = float(env.max())
    if peak <= 0.0:
        raise ValueError("cannot locate a packet in an all-zero signal")
    above = np.nonzero(env >= threshold * peak)[0]
    if above.size == 0:
        raise ValueError(f"no envelope crossing at threshold {threshold}")
    crossing = int(above[0])
    floor = max(1e-3 * peak, 2.0 * float(np.median(env)))
    quiet = np.nonzero(env[:crossing] <= floor)[0]
    if quiet.size == 0:
        return 0
    return max(int(quiet[-1]) - w // 4, 0)


def extract_packet(signal: Signal, window_name: str, manifest: DatasetManifest,
                   auto_locate: bool = False, threshold: float = 0.1,
                   smooth: int = 64) -> Signal:
    """Slice the named analysis window out of a signal, metadata preserved.

    With ``auto_locate`` the window keeps its length but starts at the
    detected packet onset (clamped so it stays inside the signal).
    """
    if window_name not in manifest.packet_windows:
        raise ValueError(
            f"unknown window {window_name!r}; manifest defines "
            f"{sorted(manifest.packet_windows)}"
        )
    start, length = manifest.packet_windows[window_name]
    n = signal.samples.size
    if auto_locate:
        start = min(locate_packet(signal, threshold, smooth), max(n - length, 0))
    if start + length > n:
        raise ValueError(
            f"window {window_name!r} ({start}, {length}) exceeds the {n}-sample signal"
        )
    return Signal(samples=signal.samples[start:start + length],
                  sample_rate=signal.sample_rate, label=signal.label)


# ---------------------------------------------------------------------------
# baseline phase
# ---------------------------------------------------------------------------

def _split_order(n: int, holdout: int, shuffle_seed):
    order = np.arange(n)
    if shuffle_seed is not None:
        order = np.random.default_rng(shuffle_seed).permutation(n)
    return order[:n - holdout], order[n - holdout:]


def run_baseline(manifest: DatasetManifest, path: str, window: str,
                 welch_config: WelchConfig, holdout: int = 0,
                 shuffle_seed=None, set_id: str = None):
    """Build the healthy ensemble for a path and hold out test records.

    The split is deterministic (first in manifest order train, remainder
    held out) unless ``shuffle_seed`` is given.  Returns the ensemble and the
    held-out healthy PSD estimates.
    """
    base = manifest.entries_for(path, set_id=set_id, label=manifest.baseline_label)
    holdout = int(holdout)
    if holdout < 0:
        raise ValueError("holdout must be >= 0")
    if len(base) < holdout + 2:
        raise ValueError(
            f"path {path!r} has {len(base)} baseline entries; "
            f"need at least holdout+2 = {holdout + 2}"
        )
    train_idx, held_idx = _split_order(len(base), holdout, shuffle_seed)

    def psd_of(entry):
        packet = extract_packet(manifest.load_entry(entry), window, manifest)
        return welch_psd(packet, welch_config)

    ensemble = BaselineEnsemble.from_psds(psd_of(base[i]) for i in train_idx)
    held = [psd_of(base[i]) for i in held_idx]
    return ensemble, held


# ---------------------------------------------------------------------------
# scoring (alpha-free sufficient statistics per test case)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ScoredCase:
    """Alpha-free record of one test case, enough to decide at any alpha."""

    case_id: str
    label: str
    is_healthy: bool
    metric: str
    stat_lo: float = math.nan  # min in-band statistic (ratio tests)
    stat_hi: float = math.nan  # max in-band statistic, or the DI value
    dof1: int = 0
    dof2: int = 0
    center: float = 0.0        # healthy DI mean (DI metrics)
    spread: float = 0.0        # healthy DI std (DI metrics)


@dataclass(frozen=True)
class PathScores:
    path: str
    window: str
    band: tuple
    welch: WelchConfig
    holdout: int
    seed: object
    k_windows: int
    m_by_set: dict
    cases: dict            # metric -> list[ScoredCase]
    damage_labels: tuple


def case_damaged(case: ScoredCase, alpha) -> bool:
    """Apply the metric's own decision rule to a scored case."""
    alpha = validate_alpha(alpha)
    if case.metric in ("f", "fm"):
        lo = f_quantile(alpha / 2.0, case.dof1, case.dof2)
        hi = f_quantile(1.0 - alpha / 2.0, case.dof1, case.dof2)
        return bool(case.stat_lo < lo or case.stat_hi > hi)
    if case.metric == "z":
        return bool(case.stat_hi > normal_quantile(1.0 - alpha / 2.0))
    if case.metric in _DI_METRICS:
        thr = normal_quantile(1.0 - alpha / 2.0) * case.spread
        return bool(abs(case.stat_hi - case.center) > thr)
    raise ValueError(f"unknown metric {case.metric!r}")


def case_score(case: ScoredCase) -> float:
    """Scalar score: the maximum in-band statistic (normalized DI deviation)."""
    if case.metric in _DI_METRICS:
        dev = abs(case.stat_hi - case.center)
        if case.spread > 0.0:
            return dev / case.spread
        return math.inf if dev > 0.0 else 0.0
    return case.stat_hi


def _stat_extrema(series, mask):
    vals = series.values[mask]
    return float(vals.min()), float(vals.max())


def compute_path_scores(manifest: DatasetManifest, path: str, window: str,
                        welch_config: WelchConfig, metrics, *, holdout: int = 0,
                        seed=None, band=None, set_id: str = None) -> PathScores:
    """Score every test case of a path once; verdicts then cost one threshold
    comparison per alpha.

    ``band`` defaults to the manifest's band (full grid if the manifest has
    none).  Baselines are scoped per set id; results are pooled across sets.
    """
    metrics = tuple(metrics)
    if not metrics:
        raise ValueError("metrics list must not be empty")
    for m in metrics:
        if m not in METRICS:
            raise ValueError(f"unknown metric {m!r}; choose from {METRICS}")
    if band is None:
        band = manifest.band
    sets = [set_id] if set_id is not None else manifest.sets_for(path)
    if not sets:
        raise ValueError(f"no entries for path {path!r}")

    cases = {m: [] for m in metrics}
    damage_labels = []
    m_by_set = {}
    k_windows = None

    for s in sets:
        base = manifest.entries_for(path, set_id=s, label=manifest.baseline_label)
        if len(base) < holdout + 2:
            raise ValueError(
                f"set {s!r} of path {path!r} has {len(base)} baselines; "
                f"need at least holdout+2 = {holdout + 2}"
            )
        insp = [e for e in manifest.entries_for(path, set_id=s)
                if e.label != manifest.baseline_label]
        train_idx, held_idx = _split_order(len(base), int(holdout), seed)

        def packet_of(entry):
            return extract_packet(manifest.load_entry(entry), window, manifest)

        train_pk = [packet_of(base[i]) for i in train_idx]
        held_pk = [packet_of(base[i]) for i in held_idx]
        insp_pk = [packet_of(e) for e in insp]
        train_psd = [welch_psd(p, welch_config) for p in train_pk]
        held_psd = [welch_psd(p, welch_config) for p in held_pk]
        insp_psd = [welch_psd(p, welch_config) for p in insp_pk]
        ensemble = BaselineEnsemble.from_psds(train_psd)
        k_windows = ensemble.k_windows
        m_by_set[s] = ensemble.m
        mask = _band_mask(ensemble.freq_grid, band)
        live = mask if ensemble.var_psd is None else mask & (ensemble.var_psd > 0.0)

        for e in insp:
            if e.label not in damage_labels:
                damage_labels.append(e.label)

        train_names = [Path(base[i].file).stem for i in train_idx]
        held_names = [Path(base[i].file).stem for i in held_idx]
        insp_names = [Path(e.file).stem for e in insp]

        # pairwise reference pools: (ref in train) x (held-out healthy),
        # falling back to ordered in-train pairs when nothing is held out
        if held_idx.size:
            healthy_pairs = [(i, held_pk[j], held_psd[j], f"{s}:{train_names[i]}->{held_names[j]}")
                             for i in range(len(train_pk)) for j in range(len(held_pk))]
        else:
            healthy_pairs = [(i, train_pk[j], train_psd[j], f"{s}:{train_names[i]}->{train_names[j]}")
                             for i in range(len(train_pk)) for j in range(len(train_pk))
                             if i != j]

        for metric in metrics:
            out = cases[metric]
            if metric == "f":
                d = 2 * k_windows
                for i, pk, psd, cid in healthy_pairs:
                    series = f_statistic(train_psd[i], psd, 0.5, band)
                    lo, hi = _stat_extrema(series, mask)
                    out.append(ScoredCase(cid, manifest.baseline_label, True, "f",
                                          stat_lo=lo, stat_hi=hi, dof1=d, dof2=d))
                for j, e in enumerate(insp):
                    for i in range(len(train_psd)):
                        series = f_statistic(train_psd[i], insp_psd[j], 0.5, band)
                        lo, hi = _stat_extrema(series, mask)
                        out.append(ScoredCase(f"{s}:{train_names[i]}->{insp_names[j]}",
                                              e.label, False, "f",
                                              stat_lo=lo, stat_hi=hi, dof1=d, dof2=d))
            elif metric == "fm":
                d1, d2 = 2 * k_windows * ensemble.m, 2 * k_windows
                for j, psd in enumerate(held_psd):
                    series = fm_statistic(ensemble, psd, 0.5, band)
                    lo, hi = _stat_extrema(series, mask)
                    out.append(ScoredCase(f"{s}:{held_names[j]}", manifest.baseline_label,
                                          True, "fm", stat_lo=lo, stat_hi=hi,
                                          dof1=d1, dof2=d2))
                for j, e in enumerate(insp):
                    series = fm_statistic(ensemble, insp_psd[j], 0.5, band)
                    lo, hi = _stat_extrema(series, mask)
                    out.append(ScoredCase(f"{s}:{insp_names[j]}", e.label, False, "fm",
                                          stat_lo=lo, stat_hi=hi, dof1=d1, dof2=d2))
            elif metric == "z":

                def zmax(psd):
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore", RuntimeWarning)
                        series = z_statistic(ensemble, psd, 0.5, band)
                    return float(series.values[live].max())

                for j, psd in enumerate(held_psd):
                    out.append(ScoredCase(f"{s}:{held_names[j]}", manifest.baseline_label,
                                          True, "z", stat_hi=zmax(psd)))
                for j, e in enumerate(insp):
                    out.append(ScoredCase(f"{s}:{insp_names[j]}", e.label, False, "z",
                                          stat_hi=zmax(insp_psd[j])))
            else:  # DI metrics
                di = janapati_di if metric == "janapati" else qiu_di
                scatter = [di(train_pk[i].samples, train_pk[j].samples)
                           for i in range(len(train_pk)) for j in range(len(train_pk))
                           if i != j]
                center = float(np.mean(scatter))
                spread = float(np.std(scatter, ddof=1)) if len(scatter) > 1 else 0.0
                for i, pk, _psd, cid in healthy_pairs:
                    out.append(ScoredCase(cid, manifest.baseline_label, True, metric,
                                          stat_hi=di(train_pk[i].samples, pk.samples),
                                          center=center, spread=spread))
                for j, e in enumerate(insp):
                    for i in range(len(train_pk)):
                        out.append(ScoredCase(f"{s}:{train_names[i]}->{insp_names[j]}",
                                              e.label, False, metric,
                                              stat_hi=di(train_pk[i].samples,
                                                         insp_pk[j].samples),
                                              center=center, spread=spread))

    return PathScores(path=path, window=window, band=band, welch=welch_config,
                      holdout=int(holdout), seed=seed, k_windows=k_windows,
                      m_by_set=m_by_set, cases={m: tuple(v) for m, v in cases.items()},
                      damage_labels=tuple(damage_labels))


# ---------------------------------------------------------------------------
# inspection phase
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class MetricSummary:
    metric: str
    false_alarms: int
    healthy_cases: int
    missed: dict  # label -> (missed_count, case_count)

    @property
    def false_alarm_pct(self):
        if self.healthy_cases == 0:
            return None
        return 100.0 * self.false_alarms / self.healthy_cases

    def missed_pct(self, label):
        missed, cases = self.missed[label]
        return None if cases == 0 else 100.0 * missed / cases


@dataclass(frozen=True)
class DetectionReport:
    path: str
    window: str
    alpha: float
    rows: tuple             # MetricSummary per metric
    verdicts: tuple         # (case_id, metric, label, verdict)
    damage_labels: tuple
    holdout: int
    m_by_set: dict
    band: tuple
    welch: WelchConfig

    def to_csv(self) -> str:
        lines = [
            f"# path = {self.path}",
            f"# window = {self.window}",
            f"# alpha = {fmt(self.alpha)}",
            f"# band = {_band_str(self.band)}",
            f"# welch = L={self.welch.segment_length},overlap={fmt(self.welch.overlap_fraction)},"
            f"nfft={self.welch.nfft},window={self.welch.window_kind},"
            f"detrend={int(self.welch.detrend_mean)}",
            f"# holdout = {self.holdout}",
            "# m_train = " + ";".join(f"{s}:{m}" for s, m in sorted(self.m_by_set.items())),
            "metric,kind,label,count,cases,pct",
        ]
        for row in self.rows:
            pct = row.false_alarm_pct
            lines.append(f"{row.metric},false_alarm,,{row.false_alarms},"
                         f"{row.healthy_cases},{'' if pct is None else fmt(pct)}")
            for label in self.damage_labels:
                missed, cases = row.missed[label]
                pct = row.missed_pct(label)
                lines.append(f"{row.metric},missed,{label},{missed},{cases},"
                             f"{'' if pct is None else fmt(pct)}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_csv(cls, text: str) -> "DetectionReport":
        meta = {}
        rows = {}
        labels = []
        for line in text.splitlines():
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                key, value = (s.strip() for s in line[1:].split("=", 1))
                meta[key] = value
                continue
            if line.startswith("metric,"):
                continue
            metric, kind, label, count, ncases, pct = line.split(",")
            rec = rows.setdefault(metric, {"fa": (0, 0), "missed": {}})
            if kind == "false_alarm":
                rec["fa"] = (int(count), int(ncases))
            else:
                rec["missed"][label] = (int(count), int(ncases))
                if label not in labels:
                    labels.append(label)
        welch_kv = dict(item.split("=") for item in meta["welch"].split(","))
        welch = WelchConfig(
            segment_length=int(welch_kv["L"]),
            overlap_fraction=float(welch_kv["overlap"]),
            nfft=int(welch_kv["nfft"]),
            window_kind=welch_kv["window"],
            detrend_mean=bool(int(welch_kv["detrend"])),
        )
        band = None
        if meta.get("band") and meta["band"] != "full":
            lo, hi = meta["band"].split(":")
            band = (float(lo), float(hi))
        m_by_set = dict((kv.split(":")[0], int(kv.split(":")[1]))
                        for kv in meta["m_train"].split(";") if kv)
        summaries = tuple(
            MetricSummary(metric=m, false_alarms=rec["fa"][0],
                          healthy_cases=rec["fa"][1], missed=dict(rec["missed"]))
            for m, rec in rows.items()
        )
        return cls(path=meta["path"], window=meta["window"], alpha=float(meta["alpha"]),
                   rows=summaries, verdicts=(), damage_labels=tuple(labels),
                   holdout=int(meta["holdout"]), m_by_set=m_by_set, band=band,
                   welch=welch)


def _band_str(band) -> str:
    return "full" if band is None else f"{fmt(band[0])}:{fmt(band[1])}"


def run_inspection(manifest: DatasetManifest, path: str, window: str,
                   welch_config: WelchConfig, metrics, alpha, *,
                   holdout: int = 0, seed=None, band=None,
                   set_id: str = None, scores: PathScores = None) -> DetectionReport:
    """Score every inspection entry of a path with every requested metric.

    Held-out healthy records feed the false-alarm columns; missed-damage
    percentages are aggregated per damage label.  Pass a precomputed
    ``scores`` to reuse one scoring pass across several alphas.
    """
    alpha = validate_alpha(alpha)
    if scores is None:
        scores = compute_path_scores(manifest, path, window, welch_config, metrics,
                                     holdout=holdout, seed=seed, band=band,
                                     set_id=set_id)
    rows = []
    verdicts = []
    for metric in scores.cases:
        fa = n_h = 0
        missed = {label: [0, 0] for label in scores.damage_labels}
        for case in scores.cases[metric]:
            damaged = case_damaged(case, alpha)
            verdicts.append((case.case_id, metric, case.label,
                             DAMAGED if damaged else HEALTHY))
            if case.is_healthy:
                n_h += 1
                fa += damaged
            else:
                missed[case.label][1] += 1
                missed[case.label][0] += not damaged
        rows.append(MetricSummary(metric=metric, false_alarms=fa, healthy_cases=n_h,
                                  missed={k: tuple(v) for k, v in missed.items()}))
    return DetectionReport(path=scores.path, window=scores.window, alpha=alpha,
                           rows=tuple(rows), verdicts=tuple(verdicts),
                           damage_labels=scores.damage_labels,
                           holdout=scores.holdout, m_by_set=dict(scores.m_by_set),
                           band=scores.band, welch=scores.welch)


# ---------------------------------------------------------------------------
# ROC
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RocCurve:
    """Operating points over a sweep, with trapezoidal area."""

    metric: str
    sweep: tuple        # swept parameter values (alpha levels or raw thresholds)
    sweep_kind: str     # "alpha" | "threshold"
    fprs: tuple
    tprs: tuple
    auc: float
    n_healthy: int
    n_damage: int
    split_note: str = ""

    def to_csv(self) -> str:
        lines = [f"{self.sweep_kind},fpr,tpr"]
        lines.extend(f"{fmt(a)},{fmt(x)},{fmt(y)}"
                     for a, x, y in zip(self.sweep, self.fprs, self.tprs))
        lines.append(f"# auc = {self.auc:.6f}")
        if self.split_note:
            lines.append(f"# split = {self.split_note}")
        lines.append(f"# cases = healthy:{self.n_healthy},damage:{self.n_damage}")
        return "\n".join(lines) + "\n"


def _trapezoid_auc(fprs, tprs) -> float:
    pts = sorted(zip(fprs, tprs))
    xs = [0.0]
    ys = [0.0]
    for x, y in pts:
        xs.append(x)
        ys.append(y)
    if xs[-1] != 1.0 or ys[-1] != 1.0:
        xs.append(1.0)
        ys.append(1.0)
    return float(np.trapezoid(ys, xs))


def default_alpha_grid() -> np.ndarray:
    """Logarithmic sweep from 1e-6 to 1, 61 points."""
    return np.logspace(-6.0, 0.0, 61)


def roc_sweep(manifest: DatasetManifest, path: str, window: str, metric: str,
              alpha_grid=None, *, welch_config: WelchConfig, holdout: int = 0,
              seed=None, band=None, set_id: str = None,
              scores: PathScores = None) -> RocCurve:
    """Decision-rule ROC: sweep alpha through the metric's own thresholds.

    fpr(alpha) is the flagged fraction of held-out healthy cases, tpr(alpha)
    the flagged fraction of damage cases.
    """
    grid = default_alpha_grid() if alpha_grid is None else np.asarray(alpha_grid, float)
    grid = np.sort(grid)
    if scores is None:
        scores = compute_path_scores(manifest, path, window, welch_config, [metric],
                                     holdout=holdout, seed=seed, band=band,
                                     set_id=set_id)
    healthy = [c for c in scores.cases[metric] if c.is_healthy]
    damage = [c for c in scores.cases[metric] if not c.is_healthy]
    if not healthy or not damage:
        raise ValueError(
            f"ROC needs both held-out healthy and damage cases; got "
            f"{len(healthy)} healthy and {len(damage)} damage for metric {metric!r}"
        )
    fprs = []
    tprs = []
    for a in grid:
        fprs.append(sum(case_damaged(c, a) for c in healthy) / len(healthy))
        tprs.append(sum(case_damaged(c, a) for c in damage) / len(damage))
    note = (f"train M=" + ";".join(f"{s}:{m}" for s, m in sorted(scores.m_by_set.items()))
            + f", holdout={scores.holdout}")
    return RocCurve(metric=metric, sweep=tuple(float(a) for a in grid),
                    sweep_kind="alpha", fprs=tuple(fprs), tprs=tuple(tprs),
                    auc=_trapezoid_auc(fprs, tprs), n_healthy=len(healthy),
                    n_damage=len(damage), split_note=note)


def score_roc(healthy_scores, damage_scores, metric: str = "score") -> RocCurve:
    """Threshold-sweep ROC over raw scalar scores (larger = more damaged)."""
    h = np.asarray(list(healthy_scores), dtype=float)
    d = np.asarray(list(damage_scores), dtype=float)
    if h.size == 0 or d.size == 0:
        raise ValueError("need at least one healthy and one damage score")
    thresholds = np.unique(np.concatenate([h, d]))[::-1]
    fprs = [float(np.mean(h >= t)) for t in thresholds]
    tprs = [float(np.mean(d >= t)) for t in thresholds]
    return RocCurve(metric=metric, sweep=tuple(float(t) for t in thresholds),
                    sweep_kind="threshold", fprs=tuple(fprs), tprs=tuple(tprs),
                    auc=_trapezoid_auc(fprs, tprs), n_healthy=h.size, n_damage=d.size)


# ---------------------------------------------------------------------------
# summary tables
# ---------------------------------------------------------------------------

def _pct_str(p) -> str:
    return "-" if p is None else f"{p:.10g}"


def summary_table(reports) -> str:
    """Render detection reports as aligned text, one block per alpha.

    Rows are metrics; columns are the false-alarm percentage followed by the
    missed-damage percentage per damage label.  All reports must agree on the
    damage-label set.
    """
    reports = list(reports)
    if not reports:
        raise ValueError("no reports to summarize")
    labels = reports[0].damage_labels
    for r in reports[1:]:
        if r.damage_labels != labels:
            raise ValueError(
                f"inconsistent damage labels across reports: "
                f"{labels} vs {r.damage_labels}"
            )
    blocks = []
    for rep in sorted(reports, key=lambda r: (r.alpha, r.path, r.window)):
        head = [f"alpha = {fmt(rep.alpha)}   path = {rep.path}   window = {rep.window}"]
        cols = ["metric", "false_alarm_%"] + [f"missed_%[{label}]" for label in labels]
        body = []
        for row in rep.rows:
            body.append([row.metric, _pct_str(row.false_alarm_pct)]
                        + [_pct_str(row.missed_pct(label)) for label in labels])
        widths = [max(len(col), *(len(r[i]) for r in body)) if body else len(col)
                  for i, col in enumerate(cols)]
        lines = head
        lines.append("  ".join(c.ljust(w) for c, w in zip(cols, widths)).rstrip())
        for r in body:
            lines.append("  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip())
        m_note = ";".join(f"{s}:{m}" for s, m in sorted(rep.m_by_set.items()))
        lines.append(
            f"[M={m_note}; holdout={rep.holdout}; band={_band_str(rep.band)}; "
            f"welch L={rep.welch.segment_length} overlap={fmt(rep.welch.overlap_fraction)} "
            f"nfft={rep.welch.nfft} {rep.welch.window_kind}]"
        )
        blocks.append("\n".join(lines))
    return ("\n\n".join(blocks)) + "\n"
