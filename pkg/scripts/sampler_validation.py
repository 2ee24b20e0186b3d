"""Statistical checks of the sampler: cell uniformity and agreement with the eigenvalue construction on S^2."""

import argparse

import numpy as np
from scipy import stats

from spherical_ensemble.dpp_sampler import SamplerConfig, eigenvalue_sampler_d1, intensity_uniformity_test, sample
from spherical_ensemble.ensemble_kernel import make_params
from spherical_ensemble.riesz_energy import riesz_energy

if __name__ == "__main__":
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--configs", type=int, default=500)
    ap.add_argument("--seed", type=int, default=7)
    a = ap.parse_args()

    cfg = SamplerConfig(make_params(2, 4), a.seed)
    stat, p = intensity_uniformity_test([sample(cfg, r) for r in range(a.configs)])
    print(f"uniformity d=2 L=4: chi2={stat:.3f} p={p:.4f}")

    cfg = SamplerConfig(make_params(1, 15), a.seed)
    schur = np.array([riesz_energy(sample(cfg, r), 2.0) for r in range(a.configs)])
    eig = np.array([riesz_energy(eigenvalue_sampler_d1(16, a.seed, r), 2.0) for r in range(a.configs)])
    ks = stats.ks_2samp(schur, eig)
    print(f"2-energy N=16: schur {schur.mean():.3f} eig {eig.mean():.3f} KS p={ks.pvalue:.4f}")
