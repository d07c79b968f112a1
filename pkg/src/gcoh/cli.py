"""``gcoh`` command line: figure data and parameter scans.

Every run writes one data file (CSV or JSON) plus ``<out>.meta.json`` holding the
command, parameters, seed, tolerances and package version. Outputs contain no
timestamps, so identical commands give byte-identical files.

Exit codes: 0 success, 2 invalid arguments, 3 numerical failure, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import itertools
import json
import math
import os
import sys
from concurrent.futures import ProcessPoolExecutor

import numpy as np

from . import __version__
from .coherence import (
    average_remote_coherence,
    coherence,
    correlated_coherence,
    entropic_coherence,
    gaussian_coherence,
    optimal_homodyne_coherence,
    pure_state_discord,
    remote_coherence,
)
from .core import GaussianState, h, partial_trace, quantum_mutual_information, single_mode_state, von_neumann_entropy
from .errors import GaussianError
from .fock import shannon_entropy
from .measurement import (
    GeneralDyneMeasurement,
    MeasurementOutcome,
    condition_on_outcome,
    conditional_first_moment_energy,
)
from .monitoring import OPOParams, opo_coherence, opo_steady_state_closed_form, threshold_squeezing
from .states import (
    InterlinkedParams,
    NormalFormParams,
    interlinked_fock_amplitudes,
    interlinked_three_mode,
    is_entangled,
    max_c1_on_physicality,
    normal_form_state,
    sample_normal_form,
    sts_from_physical_params,
    thresholds,
)

EXIT_OK, EXIT_ARGS, EXIT_NUMERIC, EXIT_IO = 0, 2, 3, 4
MAX_GRID_POINTS = 10 ** 7
TOLERANCES = {"fock_target_tail": 1e-12, "joint_target_tail": 1e-10, "physicality": 1e-9,
              "threshold_xtol": 1e-6}


class UsageError(ValueError):
    pass


# --- output ----------------------------------------------------------------------


def _cell(v):
    if isinstance(v, (bool, np.bool_)):
        return str(int(v))
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return "%.17g" % float(v)
    return str(v)


def _json_value(v):
    if isinstance(v, (bool, np.bool_)):
        return int(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return v if math.isfinite(v) else str(v)
    return v


def render(columns: list[str], rows: list[dict], fmt: str) -> str:
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\r\n")
        w.writerow(columns)
        for r in rows:
            w.writerow([_cell(r.get(c, "")) for c in columns])
        return buf.getvalue()
    payload = {"columns": columns, "rows": [[_json_value(r.get(c)) for c in columns] for r in rows]}
    return json.dumps(payload, indent=1) + "\n"


def write_outputs(path: str, columns, rows, fmt: str, meta: dict) -> None:
    text = render(columns, rows, fmt)
    meta = dict(meta, columns=list(columns), format=fmt, version=__version__, tolerances=TOLERANCES)
    with open(path, "w", newline="") as fh:
        fh.write(text)
    with open(path + ".meta.json", "w") as fh:
        json.dump(meta, fh, indent=1, sort_keys=True, default=_json_value)
        fh.write("\n")


# --- shared helpers --------------------------------------------------------------


def _floats(text: str) -> list[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"expected comma-separated numbers, got {text!r}") from exc


def _range(lo: float, hi: float, n: int) -> np.ndarray:
    if n < 1:
        raise UsageError("number of points must be positive")
    return np.linspace(lo, hi, n) if n > 1 else np.array([lo])


def _measurement(r_m: float, phi: float = 0.0) -> GeneralDyneMeasurement:
    return GeneralDyneMeasurement.homodyne_limit(phi) if math.isinf(r_m) else GeneralDyneMeasurement.from_squeezing(r_m, phi)


def _both(state: GaussianState) -> dict:
    return {"C_S": entropic_coherence(state), "C_S_G": gaussian_coherence(state)}


def _homodyne_both(p: NormalFormParams) -> dict:
    st = normal_form_state(p)
    m = GeneralDyneMeasurement.homodyne_limit(0.0)
    return {"C_S": remote_coherence(st, m, measure="entropic"), "C_S_G": remote_coherence(st, m)}


def _point_seed(seed: int, index: int) -> np.random.SeedSequence:
    return np.random.SeedSequence([seed, index])


# --- figures ---------------------------------------------------------------------


def fig1(args):
    """Zero-outcome remote coherence of a symmetric STS over (N, r_m) at fixed r."""
    rows = []
    for n in _range(0.0, args.N_max, args.N_points):
        st = normal_form_state(sts_from_physical_params(n, args.r))
        for rm in _range(0.0, args.rm_max, args.rm_points):
            cond_m = _measurement(rm)
            c_s = remote_coherence(st, cond_m, measure="entropic")
            rows.append({"N": n, "r": args.r, "r_m": rm, "C_S": c_s, "C_S_G": remote_coherence(st, cond_m)})
    return ["N", "r", "r_m", "C_S", "C_S_G"], rows


def fig2(args):
    """Homodyne remote coherence of a symmetric STS versus c up to the physicality bound."""
    rows = []
    for a in _floats(args.a):
        c_phys, _ = thresholds(a)
        for c in _range(0.0, c_phys, args.points):
            rows.append({"a": a, "c": c, **_homodyne_both(NormalFormParams.sts(a, c)), "c_phys": c_phys})
    return ["a", "c", "C_S", "C_S_G", "c_phys"], rows


def _threshold_columns(a, b, symmetric):
    c_phys, c_sep = thresholds(a, b, symmetric)
    at_sep = _homodyne_both(NormalFormParams.sts(a, c_sep, b))
    at_phys = _homodyne_both(NormalFormParams.sts(a, c_phys, b))
    return {"threshold_CS_at_sep": at_sep["C_S"], "threshold_CS_at_phys": at_phys["C_S"],
            "threshold_CSG_at_sep": at_sep["C_S_G"], "threshold_CSG_at_phys": at_phys["C_S_G"]}


THRESHOLD_COLS = ["threshold_CS_at_sep", "threshold_CS_at_phys", "threshold_CSG_at_sep", "threshold_CSG_at_phys"]


def fig3(args):
    """Random symmetric STS: homodyne remote coherence, entanglement flag and threshold curves."""
    samples = sample_normal_form(args.seed, (args.a_min, args.a_max), None, "STS", size=args.samples)
    rows = []
    for p in samples:
        rows.append({"a": p.a, "c": p.c, **_homodyne_both(p), "entangled_flag": is_entangled(p),
                     **_threshold_columns(p.a, p.a, True)})
    return ["a", "c", "C_S", "C_S_G", "entangled_flag"] + THRESHOLD_COLS, rows


def fig4(args):
    """Random asymmetric STS, or generic normal-form states with optimal homodyne angle."""
    a_rng, b_rng = (args.a_min, args.a_max), (args.b_min, args.b_max)
    rows = []
    if args.family == "sts":
        for p in sample_normal_form(args.seed, a_rng, b_rng, "STS", size=args.samples):
            rows.append({"a": p.a, "b": p.b, "c": p.c, **_homodyne_both(p), "entangled_flag": is_entangled(p),
                         **_threshold_columns(p.a, p.b, False)})
        return ["a", "b", "c", "C_S", "C_S_G", "entangled_flag"] + THRESHOLD_COLS, rows
    for p in sample_normal_form(args.seed, a_rng, b_rng, "generic", size=args.samples):
        st = normal_form_state(p)
        row = {"a": p.a, "b": p.b, "c1": p.c1, "c2": p.c2}
        row["C_S"], row["phi_opt_CS"] = optimal_homodyne_coherence(st, "entropic")
        row["C_S_G"], row["phi_opt_CSG"] = optimal_homodyne_coherence(st, "gaussian")
        row["entangled_flag"] = is_entangled(p)
        if p.a > 1 and p.b > 1:
            (c1s, _), (c1m, c2m) = max_c1_on_physicality(p.a, p.b)
            sep = normal_form_state(NormalFormParams(p.a, p.b, c1s, 0.0), tol=1e-7)
            top = normal_form_state(NormalFormParams(p.a, p.b, c1m, c2m), tol=1e-6)
            row["surface_CS_c2_zero"] = optimal_homodyne_coherence(sep, "entropic")[0]
            row["surface_CSG_c2_zero"] = optimal_homodyne_coherence(sep, "gaussian")[0]
            row["surface_CS_max_c1"] = optimal_homodyne_coherence(top, "entropic")[0]
            row["surface_CSG_max_c1"] = optimal_homodyne_coherence(top, "gaussian")[0]
        rows.append(row)
    cols = ["a", "b", "c1", "c2", "C_S", "C_S_G", "phi_opt_CS", "phi_opt_CSG", "entangled_flag",
            "surface_CS_c2_zero", "surface_CSG_c2_zero", "surface_CS_max_c1", "surface_CSG_max_c1"]
    return cols, rows


def interlinked_figures(n_b: float, n_c: float, r_m: float) -> dict:
    """Coherence, correlated coherence and discord of the BC state after measuring A."""
    p = InterlinkedParams(n_b, n_c)
    st = interlinked_three_mode(p)
    remote_state = condition_on_outcome(st, 0, _measurement(r_m))
    row = {"N_A": p.n_a, "N_B": n_b, "N_C": n_c, "r_m": r_m}
    row["C_S"] = entropic_coherence(remote_state)
    row["C_S_G"] = gaussian_coherence(remote_state)
    row["delta_C_S"] = correlated_coherence(remote_state, "entropic")
    row["delta_C_S_G"] = correlated_coherence(remote_state, "gaussian")
    row["mutual_information"] = quantum_mutual_information(remote_state)
    row["discord"] = pure_state_discord(remote_state)
    # Marginal BC state: tracing A leaves p_{pq} = |<p+q, p, q|xi>|^2 on the diagonal.
    marg = partial_trace(st, [1, 2])
    cutoff = int(math.ceil(10 * (1 + p.n_a)))
    probs = np.array(list(interlinked_fock_amplitudes(p, cutoff).values())) ** 2
    row["marginal_C_S"] = max(shannon_entropy(probs) - von_neumann_entropy(marg), 0.0)
    row["marginal_C_S_G"] = gaussian_coherence(marg)
    return row


FIG5_COLS = ["panel", "N_A", "N_B", "N_C", "r_m", "C_S", "C_S_G", "delta_C_S", "delta_C_S_G",
             "mutual_information", "discord", "marginal_C_S", "marginal_C_S_G"]


def fig5(args):
    """Interlinked three-mode state: BC coherence and discord vs r_m, and vs N_A at fixed r_m."""
    rows = []
    for rm in _range(0.0, args.rm_max, args.rm_points):
        rows.append({"panel": "rm", **interlinked_figures(args.N_B, args.N_C, rm)})
    for na in _range(args.NA_min, args.NA_max, args.NA_points):
        rows.append({"panel": "NA", **interlinked_figures(na / 2, na / 2, args.rm_fixed)})
    return FIG5_COLS, rows


def fig6(args):
    """Threshold measurement squeezing versus chi_tilde for two bath occupations."""
    rows = []
    for n in (args.N, args.N2):
        for x in _range(args.chi_min, args.chi_max, args.chi_points):
            p = OPOParams(float(x), 1.0, n)
            t_s, t_g = threshold_squeezing(p, "entropic"), threshold_squeezing(p, "gaussian")
            rows.append({"chi_tilde": x, "N": n, "rth_C_S": t_s.r_m, "rth_C_S_G": t_g.r_m,
                         "bracketed_C_S": t_s.bracketed, "bracketed_C_S_G": t_g.bracketed})
    return ["chi_tilde", "N", "rth_C_S", "rth_C_S_G", "bracketed_C_S", "bracketed_C_S_G"], rows


def fig7(args):
    """Monitored OPO steady-state coherence over (N, r_m) with the threshold curves."""
    rows = []
    ns = _range(0.0, args.N_max, args.N_points)
    for n in ns:
        for rm in _range(0.0, args.rm_max, args.rm_points):
            p = OPOParams(args.chi, 1.0, n, rm)
            rows.append({"panel": "grid", "N": n, "r_m": rm, "C_S": opo_coherence(p, "entropic"),
                         "C_S_G": opo_coherence(p, "gaussian")})
    for n in ns:
        p = OPOParams(args.chi, 1.0, n)
        for measure, name in (("entropic", "threshold_C_S"), ("gaussian", "threshold_C_S_G")):
            t = threshold_squeezing(p, measure)
            rows.append({"panel": name, "N": n, "r_m": t.r_m,
                         "C_S": opo_coherence(p, "entropic", monitored=False),
                         "C_S_G": opo_coherence(p, "gaussian", monitored=False)})
    return ["panel", "N", "r_m", "C_S", "C_S_G"], rows


def fig8(args):
    """Remote coherence for non-zero outcomes: versus outcome angle, and versus r_m."""
    st = normal_form_state(sts_from_physical_params(args.N, args.r))
    rows = []
    m = _measurement(args.rm_theta)
    for radius in _floats(args.radii):
        for th in _range(0.0, math.pi, args.theta_points):
            out = MeasurementOutcome.polar(radius, th)
            cond = condition_on_outcome(st, 1, m, out)
            rows.append({"panel": "theta", "r_m": args.rm_theta, "radius": radius, "theta": th, **_both(cond)})
    combos = [(0.0, 0.0)] + [(rad, th) for rad in _floats(args.radii_rm) for th in (0.0, math.pi / 4, math.pi / 2)]
    for rm in _range(0.0, args.rm_max, args.rm_points):
        m = _measurement(rm)
        for radius, th in combos:
            cond = condition_on_outcome(st, 1, m, MeasurementOutcome.polar(radius, th))
            rows.append({"panel": "rm", "r_m": rm, "radius": radius, "theta": th, **_both(cond)})
    return ["panel", "r_m", "radius", "theta", "C_S", "C_S_G"], rows


def fig9(args):
    """Monte Carlo average remote Gaussian coherence: (N, r_m) grid and heterodyne vs N."""
    rows = []
    idx = 0
    for n in _range(0.0, args.N_max, args.N_points):
        st = normal_form_state(sts_from_physical_params(n, args.r))
        for rm in _range(0.0, args.rm_max, args.rm_points):
            mean, se = average_remote_coherence(st, _measurement(rm), "gaussian", args.samples,
                                                _point_seed(args.seed, idx))
            idx += 1
            rows.append({"panel": "grid", "r": args.r, "N": n, "r_m": rm, "mean": mean, "stderr": se})
    for r in _floats(args.r_het):
        for n in _range(0.0, args.N_max, args.N_points):
            st = normal_form_state(sts_from_physical_params(n, r))
            mean, se = average_remote_coherence(st, GeneralDyneMeasurement.heterodyne(), "gaussian",
                                                args.samples, _point_seed(args.seed, idx))
            idx += 1
            rows.append({"panel": "heterodyne", "r": r, "N": n, "r_m": 0.0, "mean": mean, "stderr": se})
    return ["panel", "r", "N", "r_m", "mean", "stderr"], rows


FIGURES = {1: fig1, 2: fig2, 3: fig3, 4: fig4, 5: fig5, 6: fig6, 7: fig7, 8: fig8, 9: fig9}


def _add_figure_flags(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("figure-specific options (ignored by figures that do not use them)")
    g.add_argument("--r", type=float, default=1.0, help="STS squeezing r (figs 1, 8, 9)")
    g.add_argument("--N", type=float, default=None, help="thermal photons (fig 6: first bath; fig 8: STS)")
    g.add_argument("--N2", type=float, default=5.0, help="second bath occupation (fig 6)")
    g.add_argument("--N-max", dest="N_max", type=float, default=None)
    g.add_argument("--N-points", dest="N_points", type=int, default=None)
    g.add_argument("--rm-max", dest="rm_max", type=float, default=None)
    g.add_argument("--rm-points", dest="rm_points", type=int, default=None)
    g.add_argument("--a", default="1.5,2,2.5", help="comma-separated a values (fig 2)")
    g.add_argument("--points", type=int, default=51, help="points per curve (fig 2)")
    g.add_argument("--samples", type=int, default=None, help="random states (figs 3, 4) or Monte Carlo samples (fig 9)")
    g.add_argument("--a-min", dest="a_min", type=float, default=1.0)
    g.add_argument("--a-max", dest="a_max", type=float, default=5.0)
    g.add_argument("--b-min", dest="b_min", type=float, default=1.0)
    g.add_argument("--b-max", dest="b_max", type=float, default=5.0)
    g.add_argument("--family", choices=["sts", "generic"], default="sts", help="fig 4 state family")
    g.add_argument("--N-B", dest="N_B", type=float, default=1.0)
    g.add_argument("--N-C", dest="N_C", type=float, default=2.0)
    g.add_argument("--NA-min", dest="NA_min", type=float, default=0.5)
    g.add_argument("--NA-max", dest="NA_max", type=float, default=6.0)
    g.add_argument("--NA-points", dest="NA_points", type=int, default=12)
    g.add_argument("--rm-fixed", dest="rm_fixed", type=float, default=5.0, help="r_m of the N_A panel (fig 5)")
    g.add_argument("--chi", type=float, default=0.4, help="chi_tilde (fig 7)")
    g.add_argument("--chi-min", dest="chi_min", type=float, default=0.02)
    g.add_argument("--chi-max", dest="chi_max", type=float, default=0.48)
    g.add_argument("--chi-points", dest="chi_points", type=int, default=24)
    g.add_argument("--radii", default="1,2,4,6", help="outcome radii of the theta panel (fig 8)")
    g.add_argument("--radii-rm", dest="radii_rm", default="1,4", help="outcome radii of the r_m panel (fig 8)")
    g.add_argument("--rm-theta", dest="rm_theta", type=float, default=1.0, help="r_m of the theta panel (fig 8)")
    g.add_argument("--theta-points", dest="theta_points", type=int, default=37)
    g.add_argument("--r-het", dest="r_het", default="0.5,1,1.5", help="STS squeezings of the heterodyne panel (fig 9)")


# Figure defaults that differ between figures.
FIGURE_DEFAULTS = {
    1: {"N_max": 10.0, "N_points": 21, "rm_max": 3.0, "rm_points": 13},
    3: {"samples": 50_000},
    4: {"samples": 50_000},
    5: {"rm_max": 5.0, "rm_points": 21},
    6: {"N": 0.1},
    7: {"N_max": 5.0, "N_points": 11, "rm_max": 4.0, "rm_points": 17},
    8: {"N": 1.0, "rm_max": 3.0, "rm_points": 13},
    9: {"N_max": 5.0, "N_points": 11, "rm_max": 3.0, "rm_points": 7, "samples": 10_000},
}


# --- scans -----------------------------------------------------------------------


def _q_remote(N=1.0, r=1.0, r_m=0.0, phi=0.0, radius=0.0, theta=0.0, measure="gaussian", **_):
    st = normal_form_state(sts_from_physical_params(N, r))
    return remote_coherence(st, _measurement(r_m, phi), MeasurementOutcome.polar(radius, theta), measure)


def _q_single(measure):
    def f(N=0.0, r=0.0, phi=0.0, x=0.0, p=0.0, **_):
        return coherence(single_mode_state(N, r, phi, (x, p)), measure)
    return f


def _q_normal_form_homodyne(a=2.0, b=None, c1=0.0, c2=None, phi=0.0, measure="gaussian", **_):
    b = a if b is None else b
    c2 = -c1 if c2 is None else c2
    st = normal_form_state(NormalFormParams(a, b, c1, c2))
    return remote_coherence(st, GeneralDyneMeasurement.homodyne_limit(phi), None, measure)


def _q_first_moment(a=2.0, b=2.0, c=1.0, s=1.0, phi=0.0, radius=1.0, theta=0.0, **_):
    return conditional_first_moment_energy(a, b, c, s, phi, MeasurementOutcome.polar(radius, theta))


def _q_average(N=1.0, r=1.0, r_m=0.0, samples=10_000, rng_seed=0, **_):
    st = normal_form_state(sts_from_physical_params(N, r))
    mean, se = average_remote_coherence(st, _measurement(r_m), "gaussian", int(samples), rng_seed)
    return {"value": mean, "stderr": se}


def _q_opo(chi_tilde=0.4, N=0.0, r_m=0.0, measure="gaussian", monitored=1, **_):
    if math.isinf(r_m):
        return opo_coherence(OPOParams(chi_tilde, 1.0, N), measure, homodyne=True)
    return opo_coherence(OPOParams(chi_tilde, 1.0, N, r_m), measure, monitored=bool(monitored))


def _q_opo_purity(chi_tilde=0.4, N=0.0, r_m=0.0, monitored=1, **_):
    cov = opo_steady_state_closed_form(OPOParams(chi_tilde, 1.0, N, r_m), bool(monitored))
    return 1.0 / math.sqrt(np.linalg.det(cov))


def _q_threshold(chi_tilde=0.4, N=0.0, measure="gaussian", **_):
    t = threshold_squeezing(OPOParams(chi_tilde, 1.0, N), measure)
    return {"value": t.r_m, "bracketed": t.bracketed}


def _q_interlinked(N_B=1.0, N_C=2.0, r_m=1.0, **_):
    row = interlinked_figures(N_B, N_C, r_m)
    return {k: v for k, v in row.items() if k not in ("N_A", "N_B", "N_C", "r_m")}


def _q_mutual(N=1.0, r=1.0, **_):
    return quantum_mutual_information(normal_form_state(sts_from_physical_params(N, r)))


def _q_h(x=1.0, **_):
    return float(h(x))


QUANTITIES = {
    "remote_coherence": _q_remote,
    "gaussian_coherence": _q_single("gaussian"),
    "entropic_coherence": _q_single("entropic"),
    "homodyne_remote_coherence": _q_normal_form_homodyne,
    "conditional_first_moment_energy": _q_first_moment,
    "average_remote_coherence": _q_average,
    "opo_coherence": _q_opo,
    "opo_purity": _q_opo_purity,
    "threshold_squeezing": _q_threshold,
    "interlinked": _q_interlinked,
    "quantum_mutual_information": _q_mutual,
    "h": _q_h,
}


def _parse_value(text: str):
    t = text.strip()
    if t.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return int(t) if t.lstrip("+-").isdigit() else float(t)
    except ValueError:
        return t


def parse_grid(spec: str) -> dict[str, list]:
    """``"name=lo:hi:n; other=v1,v2"``: linspace or explicit values per axis."""
    axes = {}
    for part in filter(None, (s.strip() for s in spec.split(";"))):
        if "=" not in part:
            raise UsageError(f"grid axis {part!r} must look like name=lo:hi:n or name=v1,v2")
        name, vals = (s.strip() for s in part.split("=", 1))
        if name in axes:
            raise UsageError(f"axis {name!r} given twice")
        if ":" in vals:
            bits = vals.split(":")
            if len(bits) != 3:
                raise UsageError(f"range for {name!r} must be lo:hi:n")
            try:
                lo, hi, n = float(bits[0]), float(bits[1]), int(bits[2])
            except ValueError as exc:
                raise UsageError(f"bad range for {name!r}: {vals!r}") from exc
            axes[name] = [float(v) for v in _range(lo, hi, n)]
        else:
            axes[name] = [_parse_value(v) for v in vals.split(",") if v.strip()]
        if not axes[name]:
            raise UsageError(f"axis {name!r} is empty")
    if not axes:
        raise UsageError("empty grid")
    if len(axes) > 3:
        raise UsageError("at most 3 swept axes are supported")
    size = math.prod(len(v) for v in axes.values())
    if size > MAX_GRID_POINTS:
        raise UsageError(f"grid has {size} points, above the limit of {MAX_GRID_POINTS}")
    return axes


def _parse_fixed(items) -> dict:
    out = {}
    for item in items or []:
        if "=" not in item:
            raise UsageError(f"--set expects name=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = _parse_value(v)
    return out


def _eval_point(job):
    name, params, seed, index = job
    fn = QUANTITIES[name]
    if name == "average_remote_coherence":
        params = dict(params, rng_seed=_point_seed(seed, index))
    res = fn(**params)
    return res if isinstance(res, dict) else {"value": res}


def run_scan(quantity: str, grid: dict, fixed: dict, seed: int, workers: int = 1):
    if quantity not in QUANTITIES:
        raise UsageError(f"unknown quantity {quantity!r}; choose from {sorted(QUANTITIES)}")
    names = list(grid)
    points = [dict(zip(names, combo)) for combo in itertools.product(*(grid[n] for n in names))]
    jobs = [(quantity, {**fixed, **pt}, seed, i) for i, pt in enumerate(points)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_eval_point, jobs, chunksize=max(1, len(jobs) // (4 * workers))))
    else:
        results = [_eval_point(j) for j in jobs]
    extra = []
    for r in results:
        extra += [k for k in r if k not in extra]
    rows = [{**pt, **res} for pt, res in zip(points, results)]
    return names + extra, rows


# --- entry point -----------------------------------------------------------------


def _default_seed() -> int:
    env = os.environ.get("GCOH_DEFAULT_SEED")
    if env is None:
        return 0
    try:
        return int(env, 10)
    except ValueError as exc:
        raise UsageError(f"GCOH_DEFAULT_SEED must be a decimal integer, got {env!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gcoh", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"gcoh {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    fig = sub.add_parser("figure", help="write the data behind a figure")
    fig.add_argument("figure_id", type=int, choices=sorted(FIGURES))
    fig.add_argument("--seed", type=int, default=None)
    fig.add_argument("--out", default=None, help="output path (default figN.csv / figN.json)")
    fig.add_argument("--format", choices=["csv", "json"], default="csv")
    _add_figure_flags(fig)

    scan = sub.add_parser("scan", help="evaluate a named quantity on a parameter grid")
    scan.add_argument("--quantity", required=True)
    scan.add_argument("--grid", required=True, help='e.g. "N=0:5:11; r_m=0,1,2" (at most 3 axes)')
    scan.add_argument("--set", action="append", metavar="NAME=VALUE", help="fixed parameter (repeatable)")
    scan.add_argument("--out", required=True)
    scan.add_argument("--format", choices=["csv", "json"], default="csv")
    scan.add_argument("--seed", type=int, default=None)
    scan.add_argument("--parallel", type=int, nargs="?", const=os.cpu_count() or 2, default=1,
                      metavar="WORKERS", help="evaluate points in a process pool")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        seed = args.seed if args.seed is not None else _default_seed()
        if not 0 <= seed < 2 ** 64:
            raise UsageError("seed must be a 64-bit unsigned integer")
        args.seed = seed
        if args.command == "figure":
            for k, v in FIGURE_DEFAULTS.get(args.figure_id, {}).items():
                if getattr(args, k) is None:
                    setattr(args, k, v)
            for k, v in {"N": 1.0, "N_max": 5.0, "N_points": 11, "rm_max": 3.0, "rm_points": 13,
                         "samples": 10_000}.items():
                if getattr(args, k) is None:
                    setattr(args, k, v)
            out = args.out or f"fig{args.figure_id}.{args.format}"
            params = {k: v for k, v in sorted(vars(args).items())
                      if k not in ("command", "out", "format", "seed", "figure_id")}
            columns, rows = FIGURES[args.figure_id](args)
            meta = {"command": "figure", "figure": args.figure_id, "parameters": params, "seed": seed}
        else:
            grid = parse_grid(args.grid)
            fixed = _parse_fixed(args.set)
            columns, rows = run_scan(args.quantity, grid, fixed, seed, max(1, args.parallel))
            out = args.out
            meta = {"command": "scan", "quantity": args.quantity, "grid": args.grid,
                    "parameters": fixed, "seed": seed}
        write_outputs(out, columns, rows, args.format, meta)
    except UsageError as exc:
        print(f"gcoh: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    except OSError as exc:
        print(f"gcoh: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (GaussianError, np.linalg.LinAlgError, ArithmeticError) as exc:
        print(f"gcoh: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (ValueError, TypeError) as exc:
        print(f"gcoh: error: {exc}", file=sys.stderr)
        return EXIT_ARGS
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
