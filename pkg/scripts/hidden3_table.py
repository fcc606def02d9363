"""Loadings and variance block for the three-hidden-factor example.

Runs PCA, lasso SPCA, simple thresholding and FGSPCA (shipped hidden3
parameter file) and prints one block per method.

    python scripts/hidden3_table.py [--no-noise]
"""

import argparse

import numpy as np

from fgspca import cli
from fgspca.core import fit, fit_spca, pca, simple_thresholding
from fgspca.datasets import hidden_factors_covariance


def show(name, result, names):
    rep = result.report
    print(f"\n{name}")
    for n, row in zip(names, result.v):
        print(f"  {n:>4} " + " ".join(f"{x:8.3f}" for x in row))
    for label, vals in rep.rows().items():
        print(f"  {label:<24}" + " ".join(f"{x:8.2f}" if isinstance(x, float) else f"{x:8d}" for x in vals))


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--no-noise", action="store_true", help="drop the unit noise terms")
    ap.add_argument("--spca-lambda1", type=float, default=400.0)
    args = ap.parse_args()
    data = hidden_factors_covariance(noise=not args.no_noise)
    names = data.variable_names
    s = cli.resolve(cli.build_parser().parse_args(["fit", "--config", "hidden3"]))
    show("PCA", pca(data, 3), names)
    show(f"SPCA (lambda1={args.spca_lambda1:g})", fit_spca(data, 2, lam1=args.spca_lambda1), names)
    show("Simple thresholding (4, 4)", simple_thresholding(data, (4, 4)), names)
    r = fit(data, cli.model_config(s, 2))
    show(f"FGSPCA ({r.alternations} alternations, converged={r.converged})", r, names)
    np.set_printoptions(precision=4)


if __name__ == "__main__":
    main()
