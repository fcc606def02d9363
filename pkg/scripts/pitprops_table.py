"""Pitprops: lasso SPCA and FGSPCA (shipped parameter file), k=6.

    python scripts/pitprops_table.py [--config PATH] [--spca-lambda1 0.06]
"""

import argparse

from fgspca import cli
from fgspca.core import fit, fit_spca, pca
from fgspca.datasets import pitprops


def show(name, result, names):
    rep = result.report
    print(f"\n{name}: complexity {rep.model_complexity}")
    for n, row in zip(names, result.v):
        print(f"  {n:>8} " + " ".join(f"{x:7.3f}" for x in row))
    for label, vals in rep.rows().items():
        print(f"  {label:<24}" + " ".join(f"{x:7.1f}" if isinstance(x, float) else f"{x:7d}" for x in vals))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--config", default="pitprops")
    ap.add_argument("--spca-lambda1", type=float, default=0.06)
    args = ap.parse_args()
    data = pitprops()
    names = data.variable_names
    show("PCA", pca(data, 6), names)
    show(f"SPCA (lambda1={args.spca_lambda1:g})", fit_spca(data, 6, lam1=args.spca_lambda1), names)
    s = cli.resolve(cli.build_parser().parse_args(["fit", "--config", args.config]))
    r = fit(data, cli.model_config(s, 6))
    show(f"FGSPCA ({r.alternations} alternations, converged={r.converged})", r, names)


if __name__ == "__main__":
    main()
