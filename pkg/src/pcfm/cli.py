"""Command-line front end: scenario in, CSV artifacts out.

Every verb loads a scenario, runs the requested stage and writes CSV files
(numbers as %.10e) plus ``status.json`` into ``--out``. Failures print a
JSON summary on stderr and exit nonzero; files already written stay on disk
and ``status.json`` marks the run as partial.
"""
import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from .config import MODES, load_scenario
from .engine import accumulate_link, delta_gsnr, gsnr_nli, run_link, span_profiles
from .errors import ConfigError, PcfmError
from .oracle import full_gn_reference
from .polyfit import fit_polynomial

__all__ = ["main", "run", "build_parser"]

FMT = "%.10e"
VERBS = ("spp", "fit", "nli", "oracle", "compare", "sweep-np")


def _f(x):
    return FMT % x


class _Writer:
    """Serializes file output and remembers what has been written."""

    def __init__(self, out):
        self.out = Path(out)
        self.out.mkdir(parents=True, exist_ok=True)
        self.written = []

    def csv(self, name, header, rows):
        path = self.out / name
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(header)
            w.writerows(rows)
        self.written.append(name)
        return path

    def status(self, complete, error=None):
        doc = {"complete": complete, "files": self.written}
        if error is not None:
            doc["error"] = error
        with open(self.out / "status.json", "w") as fh:
            json.dump(doc, fh, indent=2, sort_keys=True)
            fh.write("\n")


def _spp_rows(spps, plans):
    for s, (spp, plan) in enumerate(zip(spps, plans)):
        f = plan.freqs
        for i in range(spp.profiles.shape[0]):
            for z, p in zip(spp.z, spp.profiles[i]):
                yield [s, i, _f(f[i]), _f(z), _f(p)]


def _fit_rows(polys, plans, degree):
    for s, (fits, plan) in enumerate(zip(polys, plans)):
        for i, poly in enumerate(fits):
            c = np.zeros(degree + 1)
            c[: poly.coeffs.size] = poly.coeffs
            yield [s, i, _f(plan.freqs[i]), poly.degree, _f(poly.rms_residual)] + [_f(x) for x in c]


def _report_rows(report):
    for i in range(report.f_cut.size):
        yield [i, _f(report.f_cut[i]), _f(report.g_nli[i]), _f(report.p_nli[i]), _f(report.gsnr_nli_db[i]),
               "; ".join(report.warnings[i])]


REPORT_HEADER = ["channel", "f_cut_thz", "g_nli_mw_per_thz", "p_nli_mw", "gsnr_nli_db", "warnings"]


def oracle_link(config, result):
    """Reference link report built from the same SPPs and transfers as ``result``."""
    opt = config.oracle
    psd = np.zeros_like(result.span_psd)
    for s, setup in enumerate(config.spans):
        ref = full_gn_reference(
            setup.plan, result.spps[s], setup.fiber,
            include_mci=opt.include_mci,
            lozenge_domains=opt.domain == "lozenge",
            profile_source=opt.profile_source,
            polys=result.polys[s] if opt.profile_source == "poly" else None,
            transfer=result.transfers[s],
            rtol=opt.rtol,
            budget=opt.budget,
        )
        psd[s] = ref.g_nli
    g_end = accumulate_link(psd, result.transfers)
    return gsnr_nli(config.plan, g_end, correction=config.correction, p_ch=result.report.p_ch)


def run(config, out, verb="nli", mode=None, degree=None, tol=None):
    """Run one CLI verb on a loaded scenario and write its artifacts to ``out``."""
    if verb not in VERBS:
        raise ValueError(f"unknown verb {verb!r}")
    w = _Writer(out)
    degree = config.fit_degree if degree is None else degree
    if degree < 0:
        raise ConfigError(f"fit degree must be >= 0, got {degree}", path="--np")
    if tol is not None:
        if not tol > 0:
            raise ConfigError(f"tolerance must be > 0, got {tol}", path="--tol")
        config.oracle.rtol = tol
    mode = {"oracle": "oracle", "compare": "compare"}.get(verb, mode or config.mode)
    plans = [s.plan for s in config.spans]
    try:
        if verb == "spp":
            spps = [span_profiles(s, config.grid_points) for s in config.spans]
            w.csv("spp.csv", ["span", "channel", "freq_thz", "z_km", "p"], _spp_rows(spps, plans))
        elif verb == "fit":
            spps = [span_profiles(s, config.grid_points) for s in config.spans]
            polys = [[fit_polynomial(spp.z, spp.profiles[i], degree, pin_origin=config.pin_origin)
                      for i in range(len(plan))] for spp, plan in zip(spps, plans)]
            w.csv("spp.csv", ["span", "channel", "freq_thz", "z_km", "p"], _spp_rows(spps, plans))
            w.csv("fit.csv", ["span", "channel", "freq_thz", "degree", "rms_residual"]
                  + [f"c{k}" for k in range(degree + 1)], _fit_rows(polys, plans, degree))
        elif verb == "sweep-np":
            spps = None
            summary = []
            for d in range(1, degree + 1):
                res = run_link(config.spans, d, config.grid_points, config.correction, spps, config.pin_origin)
                spps = res.spps
                w.csv(f"report_np{d}.csv", REPORT_HEADER, _report_rows(res.report))
                summary.extend([d, i, _f(res.report.f_cut[i]), _f(res.report.gsnr_nli_db[i])]
                               for i in range(len(config.plan)))
            w.csv("sweep_np.csv", ["degree", "channel", "f_cut_thz", "gsnr_nli_db"], summary)
        else:
            res = run_link(config.spans, degree, config.grid_points, config.correction, None, config.pin_origin)
            w.csv("spp.csv", ["span", "channel", "freq_thz", "z_km", "p"], _spp_rows(res.spps, plans))
            w.csv("fit.csv", ["span", "channel", "freq_thz", "degree", "rms_residual"]
                  + [f"c{k}" for k in range(degree + 1)], _fit_rows(res.polys, plans, degree))
            if mode in ("pcfm", "compare"):
                w.csv("report.csv", REPORT_HEADER, _report_rows(res.report))
            if mode in ("oracle", "compare"):
                ref = oracle_link(config, res)
                w.csv("report_oracle.csv", REPORT_HEADER, _report_rows(ref))
            if mode == "compare":
                d = delta_gsnr(res.report, ref)
                w.csv("delta_gsnr.csv", ["channel", "f_cut_thz", "gsnr_pcfm_db", "gsnr_oracle_db", "delta_gsnr_db"],
                      ([i, _f(res.report.f_cut[i]), _f(res.report.gsnr_nli_db[i]), _f(ref.gsnr_nli_db[i]), _f(d[i])]
                       for i in range(d.size)))
    except Exception as exc:
        w.status(False, error=_error_doc(exc))
        raise
    w.status(True)
    return w.written


def _error_doc(exc):
    return {"type": type(exc).__name__, "message": str(exc), "context": exc.context() if isinstance(exc, PcfmError) else {}}


def build_parser():
    p = argparse.ArgumentParser(prog="pcfm", description="Polynomial closed-form NLI estimates from a scenario file.")
    p.add_argument("verb", choices=VERBS, help="stage to run")
    p.add_argument("--config", required=True, help="scenario YAML path or bundled scenario name")
    p.add_argument("--out", default="pcfm_out", help="output directory (default: %(default)s)")
    p.add_argument("--np", type=int, dest="degree", default=None,
                   help="polynomial fit degree; for sweep-np the highest degree swept")
    p.add_argument("--mode", choices=MODES, default=None, help="engine mode for the nli verb")
    p.add_argument("--tol", type=float, default=None, help="oracle relative tolerance")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        config = load_scenario(args.config)
        files = run(config, args.out, args.verb, args.mode, args.degree, args.tol)
    except Exception as exc:
        json.dump(_error_doc(exc), sys.stderr, default=str)
        sys.stderr.write("\n")
        return 1
    for name in files:
        print(Path(args.out) / name)
    return 0


if __name__ == "__main__":
    sys.exit(main())
