"""Pure numpy implementations of the hot numeric kernels.

These are the reference semantics; ``thzchan.kernels._core`` is a compiled
drop-in replacement built from the same formulas.  Keep both files in sync.
"""

import numpy as np

BACKEND = "python"


def ray_path_distance(d_center, az_tx, az_rx, r_tx, r_rx,
                      off_az_tx, off_el_tx, off_az_rx, off_el_rx):
    """Total path length of scattered rays from the specular-center geometry.

    ``d_center`` is the total distance of the cluster's specular path,
    ``az_tx``/``az_rx`` the azimuth angles of the cluster center at the two
    ends, ``r_tx``/``r_rx`` the distance ratios of the two hops, and the
    ``off_*`` arrays the per-ray angular offsets (radians, |offset| < pi/2).
    """
    off_az_tx = np.asarray(off_az_tx, dtype=np.float64)
    d_v = d_center * (np.sin(az_rx) * r_rx / np.cos(off_el_rx)
                      + np.sin(az_tx) * r_tx / np.cos(off_el_tx))
    d_h = d_center * (np.cos(az_rx) * r_rx / np.cos(off_az_rx)
                      + np.cos(az_tx) * r_tx / np.cos(off_az_tx))
    return np.hypot(d_v, d_h)


def mirror_step(d_tx, d_rx, disp_tx, disp_rx):
    """Two-step mirror-point distance update for a batch of rays.

    ``d_tx``/``d_rx`` are (N, 3) vectors from the Tx/Rx reference position to
    the mirror image of the opposite end; both rows of a ray have equal norm
    (the total path length).  ``disp_rx`` is applied first with the Tx mirror
    frozen, then ``disp_tx`` against the Rx mirror.  Returns the updated
    vector pair plus the new total distances; norms stay consistent.
    """
    d_tx = np.asarray(d_tx, dtype=np.float64)
    d_rx = np.asarray(d_rx, dtype=np.float64)
    new_rx = d_rx - np.asarray(disp_rx, dtype=np.float64)
    dist_tmp = np.sqrt(np.einsum("ij,ij->i", new_rx, new_rx))
    norm_tx = np.sqrt(np.einsum("ij,ij->i", d_tx, d_tx))
    scaled_tx = d_tx * (dist_tmp / norm_tx)[:, None]
    new_tx = scaled_tx - np.asarray(disp_tx, dtype=np.float64)
    dist_new = np.sqrt(np.einsum("ij,ij->i", new_tx, new_tx))
    new_rx = new_rx * (dist_new / dist_tmp)[:, None]
    return new_tx, new_rx, dist_new


def stf_power_profile(tau, z_db, xi, gamma, alive, freqs, f_c, ds, r_tau):
    """Normalized ray powers over (sub-band, ray).

    Pre-normalization power of ray m in sub-band i is
    ``exp(-tau_m (r_tau-1)/(r_tau ds)) * 10^(-z_db_m/10) * xi_m *
    (f_i/f_c)^gamma_m`` masked by ``alive[i, m]``; each row is normalized to
    unit sum.  Rows with no live ray come back all-zero.
    """
    tau = np.asarray(tau, dtype=np.float64)
    freqs = np.asarray(freqs, dtype=np.float64)
    base = np.exp(-tau * (r_tau - 1.0) / (r_tau * ds))
    base = base * 10.0 ** (-np.asarray(z_db, dtype=np.float64) / 10.0)
    base = base * np.asarray(xi, dtype=np.float64)
    ratio = freqs[:, None] / f_c
    powers = base[None, :] * ratio ** np.asarray(gamma, dtype=np.float64)[None, :]
    powers = powers * np.asarray(alive, dtype=np.float64)
    totals = powers.sum(axis=1)
    scale = np.where(totals > 0.0, totals, 1.0)
    return powers / scale[:, None]


def psd_correlation_scan(powers, anchor, step):
    """Normalized delay-PSD correlation from an anchor row outward.

    ``powers[i, m]`` is the power of delay bin m in series element i.  Lag l
    correlation is ``sum_m P[a] P[a+step*l] / max(sum P[a]^2,
    sum P[a+step*l]^2)``.  Returns one value per available lag, lag 0 first.
    """
    powers = np.asarray(powers, dtype=np.float64)
    n = powers.shape[0]
    if step > 0:
        n_lags = n - anchor
    else:
        n_lags = anchor + 1
    ref = powers[anchor]
    ref_self = float(ref @ ref)
    out = np.empty(n_lags, dtype=np.float64)
    for lag in range(n_lags):
        row = powers[anchor + step * lag]
        cross = float(ref @ row)
        denom = max(ref_self, float(row @ row))
        out[lag] = cross / denom if denom > 0.0 else 0.0
    return out
