"""Parametric synthetic ECG: Gaussian-bump PQRST beats, irregular rhythms and f-waves.

Not physiologically validated. The generator exists so the full pipeline can be
exercised without the challenge dataset, with known R-peak times.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .signal import DEFAULT_FS, EcgRecord, Label

# (offset from R peak [s], rising width [s], falling width [s], amplitude relative to R).
# T waves rise slowly and fall fast; P amplitude comes from params.
BEAT_SHAPE = {
    "P": (-0.17, 0.028, 0.018, None),
    "Q": (-0.035, 0.010, 0.010, -0.12),
    "R": (0.0, 0.010, 0.013, 1.0),
    "S": (0.035, 0.012, 0.012, -0.25),
    "T": (0.26, 0.060, 0.032, 0.30),
}
AF_MIN_RR_CV = 0.15
NORMAL_AR_COEF = 0.8


@dataclass(frozen=True)
class SynthParams:
    fs: int = DEFAULT_FS
    duration_s: float = 30.0
    mean_hr_bpm: float = 70.0
    rr_cv: float | None = None
    p_amp: float | None = None
    fwave_amp: float | None = None
    fwave_hz: float = 6.0
    noise_amp: float = 0.01
    wander_amp: float = 0.0
    hr_spread: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.fs <= 0 or self.duration_s <= 0 or self.mean_hr_bpm <= 0:
            raise ValueError("fs, duration_s and mean_hr_bpm must be positive")
        for name in ("rr_cv", "p_amp", "fwave_amp"):
            v = getattr(self, name)
            if v is not None and v < 0:
                raise ValueError(f"{name} must be non-negative")
        if self.noise_amp < 0 or self.wander_amp < 0 or self.hr_spread < 0:
            raise ValueError("noise amplitudes must be non-negative")

    def resolved(self, kind: Label) -> SynthParams:
        """Fill class defaults; AF forces p_amp 0, rr_cv >= 0.15 and visible f-waves."""
        if Label(kind) is Label.AF:
            rr_cv = max(0.25 if self.rr_cv is None else self.rr_cv, AF_MIN_RR_CV)
            fwave = 0.05 if not self.fwave_amp else self.fwave_amp
            return replace(self, rr_cv=rr_cv, p_amp=0.0, fwave_amp=fwave)
        return replace(
            self,
            rr_cv=0.03 if self.rr_cv is None else self.rr_cv,
            p_amp=0.15 if self.p_amp is None else self.p_amp,
            fwave_amp=0.0 if self.fwave_amp is None else self.fwave_amp,
        )


def _rr_intervals(kind: Label, p: SynthParams, rng: np.random.Generator, count: int) -> np.ndarray:
    mean_rr = 60.0 / p.mean_hr_bpm
    sigma = np.sqrt(np.log1p(p.rr_cv ** 2))
    eps = rng.standard_normal(count)
    if kind is Label.NORMAL:
        # AR(1) smoothing keeps consecutive beats similar, as in sinus rhythm
        ar = np.empty(count)
        ar[0] = eps[0]
        scale = np.sqrt(1.0 - NORMAL_AR_COEF ** 2)
        for i in range(1, count):
            ar[i] = NORMAL_AR_COEF * ar[i - 1] + scale * eps[i]
        eps = ar
    if count > 1 and sigma > 0:
        # pin the realized spread so short records still hit the requested variability
        eps = (eps - eps.mean()) / eps.std()
    else:
        eps = np.zeros(count)
    return np.exp(np.log(mean_rr) - sigma ** 2 / 2 + sigma * eps)


def _bump(t: np.ndarray, center: float, rise: float, fall: float, amp: float) -> np.ndarray:
    width = np.where(t < center, rise, fall)
    return amp * np.exp(-0.5 * ((t - center) / width) ** 2)


def synth_components(kind: Label | str, params: SynthParams = SynthParams()):
    """Return ``(components, r_times)``; components maps part name to a waveform.

    Parts: ``ventricular`` (QRS-T), ``atrial`` (P waves), ``fwave``, ``noise``.
    """
    kind = Label(kind)
    if kind is Label.UNLABELED:
        raise ValueError("kind must be Normal or AF")
    p = params.resolved(kind)
    n = int(round(p.duration_s * p.fs))
    mean_rr = 60.0 / p.mean_hr_bpm
    if p.duration_s < mean_rr:
        raise ValueError(f"duration {p.duration_s}s is too short for one beat at {p.mean_hr_bpm} bpm")
    rng = np.random.default_rng(p.seed)
    count = int(np.ceil(2.0 * p.duration_s / mean_rr)) + 4
    rr = _rr_intervals(kind, p, rng, count)
    first = rng.uniform(0.3, 0.3 + mean_rr)
    beats = first + np.concatenate([[0.0], np.cumsum(rr[:-1])])
    duration = n / p.fs
    r_times = beats[beats < duration - 1e-9]
    if r_times.size == 0:
        raise ValueError("record too short to contain a beat")

    t = np.arange(n) / p.fs
    ventricular = np.zeros(n)
    atrial = np.zeros(n)
    # beats just outside the record still leak their P/T tails into it
    for r in beats[(beats > -1.0) & (beats < duration + 1.0)]:
        lo = max(0, int((r - 0.4) * p.fs))
        hi = min(n, int((r + 0.6) * p.fs) + 1)
        if lo >= hi:
            continue
        tt = t[lo:hi]
        for name, (off, rise, fall, amp) in BEAT_SHAPE.items():
            if name == "P":
                if p.p_amp > 0:
                    atrial[lo:hi] += _bump(tt, r + off, rise, fall, p.p_amp)
            else:
                ventricular[lo:hi] += _bump(tt, r + off, rise, fall, amp)
    fwave = np.zeros(n)
    if p.fwave_amp > 0:
        # slowly drifting frequency and amplitude, as in coarse fibrillation
        phase0 = rng.uniform(0, 2 * np.pi)
        drift = np.cumsum(rng.normal(0, 0.02, n)) / np.sqrt(p.fs)
        freq = p.fwave_hz * (1.0 + 0.1 * np.tanh(drift))
        phase = phase0 + 2 * np.pi * np.cumsum(freq) / p.fs
        fwave = p.fwave_amp * np.sin(phase)
    noise = rng.normal(0.0, p.noise_amp, n) if p.noise_amp > 0 else np.zeros(n)
    if p.wander_amp > 0:
        noise = noise + p.wander_amp * np.sin(2 * np.pi * rng.uniform(0.1, 0.4) * t + rng.uniform(0, 2 * np.pi))
    return {"ventricular": ventricular, "atrial": atrial, "fwave": fwave, "noise": noise}, r_times


def synth_record(kind: Label | str, params: SynthParams = SynthParams(), record_id: str | None = None) -> EcgRecord:
    kind = Label(kind)
    parts, r_times = synth_components(kind, params)
    samples = sum(parts.values()).astype(np.float32)
    rid = record_id or f"{kind.value.lower()}_{params.seed}"
    return EcgRecord(rid, samples, params.fs, kind, r_times)


def synth_corpus(n_normal: int, n_af: int, params: SynthParams = SynthParams(), seed: int = 0) -> list[EcgRecord]:
    """Normal records first, then AF; each record gets its own seed spawned from ``seed``."""
    if n_normal < 0 or n_af < 0:
        raise ValueError("counts must be non-negative")
    children = np.random.SeedSequence(seed).spawn(n_normal + n_af)
    records = []
    for i, child in enumerate(children):
        kind = Label.NORMAL if i < n_normal else Label.AF
        rec_seed, hr_seed = (int(v) for v in child.generate_state(2, dtype=np.uint32))
        hr = params.mean_hr_bpm
        if params.hr_spread > 0:
            # per-record resting rate, log-normal around the configured mean
            hr *= float(np.exp(np.random.default_rng(hr_seed).normal(0.0, params.hr_spread)))
        rid = f"s{seed}_{'N' if kind is Label.NORMAL else 'A'}{i:05d}"
        records.append(synth_record(kind, replace(params, seed=rec_seed, mean_hr_bpm=hr), rid))
    return records


def rr_cv(record: EcgRecord) -> float:
    """Coefficient of variation of the annotated RR intervals."""
    rr = np.diff(record.annotations)
    return float(rr.std() / rr.mean())


# "clean" is nearly separable by rhythm alone; "hard" buries the cues in noise, wander and HR spread.
PRESETS: dict[str, SynthParams] = {
    "clean": SynthParams(),
    "hard": SynthParams(noise_amp=0.05, wander_amp=0.15, fwave_amp=0.03, hr_spread=0.15),
}


def preset(name: str, **overrides) -> SynthParams:
    try:
        base = PRESETS[name]
    except KeyError:
        raise ValueError(f"unknown synth preset {name!r}; choose from {sorted(PRESETS)}") from None
    return replace(base, **overrides)
