"""Reference implementations written directly from the feature definitions.

Deliberately plain Python (or direct FFT) and independent of the
production code paths they check.
"""
import math
import statistics

import numpy as np
import scipy.signal as sps

BIN_MS = 7.8125


def hrv_oracle(nn):
    nn = [float(v) for v in nn]
    n = len(nn)
    diffs = [b - a for a, b in zip(nn, nn[1:])]
    mean = statistics.fmean(nn)
    sdnn = statistics.stdev(nn)
    rmssd = math.sqrt(sum(d * d for d in diffs) / len(diffs))
    med = statistics.median(nn)
    mad = 1.4826 * statistics.median([abs(v - med) for v in nn])
    q1, _, q3 = statistics.quantiles(nn, n=4, method="inclusive")
    lo, hi = min(nn), max(nn)
    n_bins = max(1, math.ceil((hi - lo) / BIN_MS))
    counts = [0] * n_bins
    for v in nn:
        counts[min(int((v - lo) // BIN_MS), n_bins - 1)] += 1
    return {
        "HRV_MeanNN": mean,
        "HRV_SDNN": sdnn,
        "HRV_RMSSD": rmssd,
        "HRV_SDSD": statistics.stdev(diffs),
        "HRV_CVNN": sdnn / mean,
        "HRV_MedianNN": med,
        "HRV_CVSD": rmssd / mean,
        "HRV_MadNN": mad,
        "HRV_MCVNN": mad / med,
        "HRV_IQRNN": q3 - q1,
        "HRV_pNN50": 100.0 * sum(abs(d) > 50 for d in diffs) / len(diffs),
        "HRV_pNN20": 100.0 * sum(abs(d) > 20 for d in diffs) / len(diffs),
        "HRV_HTI": n / max(counts),
        "HRV_TINN": tinn_oracle(counts, lo),
    }


def tinn_oracle(counts, lo):
    """Exhaustive least-squares triangle over bin edges around the first modal bin."""
    edges = [lo + BIN_MS * i for i in range(len(counts) + 1)]
    centers = [(a + b) / 2 for a, b in zip(edges, edges[1:])]
    mode = counts.index(max(counts))
    ax, ay = centers[mode], counts[mode]
    best = None
    for left in edges[: mode + 1]:
        for right in edges[mode + 1:]:
            err = 0.0
            for c, h in zip(centers, counts):
                if c <= left or c >= right:
                    q = 0.0
                elif c <= ax:
                    q = ay * (c - left) / (ax - left)
                else:
                    q = ay * (right - c) / (right - ax)
                err += (h - q) ** 2
            if best is None or err < best[0]:
                best = (err, right - left)
    return best[1]


def welch_band_powers(data, fs, bands, seg_s=4.0):
    """Averaged periodogram (Hann, 50% overlap) by explicit FFT, then trapezoid per band."""
    data = np.atleast_2d(np.asarray(data, dtype=float))
    m = int(round(seg_s * fs))
    step = m // 2
    k = np.arange(m)
    w = 0.5 - 0.5 * np.cos(2 * np.pi * k / m)
    psds = []
    for row in data:
        segs = [row[i:i + m] for i in range(0, row.size - m + 1, step)]
        acc = np.zeros(m // 2 + 1)
        for s in segs:
            spec = np.fft.rfft((s - s.mean()) * w)
            p = np.abs(spec) ** 2 / (fs * np.sum(w * w))
            p[1:-1 if m % 2 == 0 else None] *= 2
            acc += p
        psds.append(acc / len(segs))
    psd = np.mean(psds, axis=0)
    f = np.arange(m // 2 + 1) * fs / m
    out = []
    for lo, hi in bands:
        sel = (f >= lo) & (f <= hi)
        ff, pp = f[sel], psd[sel]
        out.append(float(np.sum((pp[1:] + pp[:-1]) * np.diff(ff)) / 2) if sel.sum() >= 2 else 0.0)
    return out


def zero_phase_response(spec, freqs, fs):
    _, h = sps.sosfreqz(spec.sos(fs), worN=freqs, fs=fs)
    return np.abs(h) ** 2


def eda_phasic_oracle(x, fs, pre_spec, tonic_spec, pad_s=400.0):
    """Phasic component by applying both zero-phase responses in the frequency domain.

    The input is padded with its edge values so the circular wrap is negligible.
    """
    pad = int(pad_s * fs)
    long = np.concatenate([np.full(pad, x[0]), x, np.full(pad, x[-1])])
    spec = np.fft.rfft(long)
    f = np.fft.rfftfreq(long.size, 1 / fs)
    g_pre = zero_phase_response(pre_spec, f, fs)
    g_tonic = zero_phase_response(tonic_spec, f, fs)
    phasic = np.fft.irfft(spec * g_pre * (1 - g_tonic), long.size)
    return phasic[pad:pad + x.size]
