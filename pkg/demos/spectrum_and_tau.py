"""Spectrum of a small twisted chain and the tau-function view of its eigenvalues.

Run: python3 demos/spectrum_and_tau.py
"""
import numpy as np

from mastertau import mkp, rs
from mastertau.model import SpinChainSpec
from mastertau.spinchain import spectrum
from mastertau.symfun import ShiftedTimes

spec = SpinChainSpec.random(2, 3, seed=1)
print("twist eigenvalues w:", np.round(spec.w, 4))
print("inhomogeneities u:  ", np.round(spec.u, 4))

records = spectrum(spec)
rng = np.random.default_rng(0)
print(f"\n{len(records)} eigenstates")
print(f"{'weight':>8}  {'max |charpoly(Y0) - prod (z-w_a)^m_a|':>38}  {'Hirota residual at t=0':>23}")
for rec in records:
    # quantum energies -> classical Lax matrix; its spectrum is fixed by the weight
    Y0 = rs.y0_from_record(rec, spec)
    qc_err = np.abs(rs.char_poly(Y0) - rs.twist_poly(rec.m, spec.w)).max()
    tau = mkp.TauSeries.from_record(rec, spec)
    z = 1.5 * (rng.normal(size=3) + 1j * rng.normal(size=3))
    hirota = abs(mkp.hirota3(tau, 0.3 + 0.2j, ShiftedTimes(), *z))
    print(f"{str(rec.m):>8}  {qc_err:38.1e}  {hirota:23.1e}")

# the eigenvalue tau function is a polynomial in u at t = 0 whose zeros are the u_i
tau = mkp.TauSeries.from_record(records[3], spec)
print("\ntau(u, 0) zeros:", np.round(np.sort_complex(np.roots(tau.poly(())[::-1])), 6))
