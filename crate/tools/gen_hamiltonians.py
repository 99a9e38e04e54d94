#!/usr/bin/env python3
"""Generate the qubit Hamiltonian data files shipped under data/.

Restricted Hartree-Fock in the STO-3G basis for molecules built from
hydrogen atoms (s-type Gaussians only, so every integral has a closed
form), followed by a Jordan-Wigner mapping of the second-quantized
Hamiltonian over all molecular spin-orbitals.

Conventions recorded in the emitted files:
  - spin-orbital p = 2 * (spatial MO index) + spin (0 = alpha, 1 = beta)
  - qubit p carries spin-orbital p; qubit 0 is the leftmost character of
    each Pauli string and the most significant bit of a basis index
  - Jordan-Wigner: a_p = Z_0 ... Z_{p-1} |0><1|_p

Usage: python3 tools/gen_hamiltonians.py [outdir]
"""

import sys
import itertools
import numpy as np

ANGSTROM_TO_BOHR = 1.0 / 0.529177210903

# STO-3G hydrogen 1s: (exponent, contraction coefficient)
STO3G_H = [
    (3.425250914, 0.1543289673),
    (0.6239137298, 0.5353281423),
    (0.1688554040, 0.4446345422),
]


def boys0(t):
    if t < 1e-12:
        return 1.0 - t / 3.0
    from math import erf, sqrt, pi

    return 0.5 * sqrt(pi / t) * erf(sqrt(t))


class Basis:
    """Contracted s-type Gaussians, one per hydrogen center."""

    def __init__(self, centers):
        self.centers = [np.asarray(c, dtype=float) for c in centers]
        self.prims = []
        for center in self.centers:
            prims = []
            for alpha, coeff in STO3G_H:
                norm = (2.0 * alpha / np.pi) ** 0.75
                prims.append((alpha, coeff * norm, center))
            self.prims.append(prims)
        # normalize each contracted function
        for i, prims in enumerate(self.prims):
            s = 0.0
            for a, ca, ra in prims:
                for b, cb, rb in prims:
                    s += ca * cb * self._prim_overlap(a, ra, b, rb)
            self.prims[i] = [(a, c / np.sqrt(s), r) for a, c, r in prims]

    @staticmethod
    def _prim_overlap(a, ra, b, rb):
        ab = a + b
        d2 = float(np.dot(ra - rb, ra - rb))
        return (np.pi / ab) ** 1.5 * np.exp(-a * b / ab * d2)

    def n(self):
        return len(self.prims)

    def overlap(self):
        n = self.n()
        s = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                for a, ca, ra in self.prims[i]:
                    for b, cb, rb in self.prims[j]:
                        s[i, j] += ca * cb * self._prim_overlap(a, ra, b, rb)
        return s

    def kinetic(self):
        n = self.n()
        t = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                for a, ca, ra in self.prims[i]:
                    for b, cb, rb in self.prims[j]:
                        ab = a + b
                        mu = a * b / ab
                        d2 = float(np.dot(ra - rb, ra - rb))
                        val = mu * (3.0 - 2.0 * mu * d2) * (np.pi / ab) ** 1.5
                        t[i, j] += ca * cb * val * np.exp(-mu * d2)
        return t

    def nuclear(self, charges):
        n = self.n()
        v = np.zeros((n, n))
        for i in range(n):
            for j in range(n):
                for a, ca, ra in self.prims[i]:
                    for b, cb, rb in self.prims[j]:
                        ab = a + b
                        mu = a * b / ab
                        d2 = float(np.dot(ra - rb, ra - rb))
                        p = (a * ra + b * rb) / ab
                        pref = ca * cb * 2.0 * np.pi / ab * np.exp(-mu * d2)
                        for z, rc in charges:
                            pc2 = float(np.dot(p - rc, p - rc))
                            v[i, j] -= pref * z * boys0(ab * pc2)
        return v

    def eri(self):
        """Chemist-notation (ij|kl)."""
        n = self.n()
        g = np.zeros((n, n, n, n))
        for i, j, k, l in itertools.product(range(n), repeat=4):
            acc = 0.0
            for a, ca, ra in self.prims[i]:
                for b, cb, rb in self.prims[j]:
                    ab = a + b
                    p = (a * ra + b * rb) / ab
                    kab = np.exp(-a * b / ab * float(np.dot(ra - rb, ra - rb)))
                    for c, cc, rc in self.prims[k]:
                        for d, cd, rd in self.prims[l]:
                            cd_ = c + d
                            q = (c * rc + d * rd) / cd_
                            kcd = np.exp(
                                -c * d / cd_ * float(np.dot(rc - rd, rc - rd))
                            )
                            rho = ab * cd_ / (ab + cd_)
                            pq2 = float(np.dot(p - q, p - q))
                            val = (
                                2.0
                                * np.pi**2.5
                                / (ab * cd_ * np.sqrt(ab + cd_))
                                * kab
                                * kcd
                                * boys0(rho * pq2)
                            )
                            acc += ca * cb * cc * cd * val
            g[i, j, k, l] = acc
        return g


def rhf(basis, charges, n_elec):
    s = basis.overlap()
    hcore = basis.kinetic() + basis.nuclear(charges)
    g = basis.eri()
    evals, evecs = np.linalg.eigh(s)
    s_half_inv = evecs @ np.diag(evals**-0.5) @ evecs.T
    nocc = n_elec // 2
    dens = np.zeros_like(s)
    energy = 0.0
    for _ in range(200):
        coul = np.einsum("ijkl,kl->ij", g, dens)
        exch = np.einsum("ikjl,kl->ij", g, dens)
        fock = hcore + 2.0 * coul - exch
        fp = s_half_inv @ fock @ s_half_inv
        _, cp = np.linalg.eigh(fp)
        coeff = s_half_inv @ cp
        dens_new = coeff[:, :nocc] @ coeff[:, :nocc].T
        e_new = float(np.einsum("ij,ij->", dens_new, hcore + fock))
        if abs(e_new - energy) < 1e-13 and np.max(np.abs(dens_new - dens)) < 1e-12:
            dens = dens_new
            energy = e_new
            break
        dens, energy = dens_new, e_new
    e_nuc = 0.0
    for (za, ra), (zb, rb) in itertools.combinations(charges, 2):
        e_nuc += za * zb / np.linalg.norm(np.asarray(ra) - np.asarray(rb))
    h_mo = coeff.T @ hcore @ coeff
    g_mo = np.einsum("pi,qj,rk,sl,pqrs->ijkl", coeff, coeff, coeff, coeff, g)
    return energy + e_nuc, e_nuc, h_mo, g_mo


I2 = np.eye(2, dtype=complex)
PAULI = {
    "I": I2,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
LOWER = np.array([[0, 1], [0, 0]], dtype=complex)  # |0><1|


def kron_chain(mats):
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def annihilation_ops(n_qubits):
    ops = []
    for p in range(n_qubits):
        mats = [PAULI["Z"]] * p + [LOWER] + [I2] * (n_qubits - p - 1)
        ops.append(kron_chain(mats))
    return ops


def qubit_hamiltonian(e_nuc, h_mo, g_mo):
    n_orb = h_mo.shape[0]
    n_q = 2 * n_orb
    dim = 1 << n_q
    a = annihilation_ops(n_q)
    ad = [m.conj().T for m in a]
    h = e_nuc * np.eye(dim, dtype=complex)
    for p in range(n_q):
        for q in range(n_q):
            if p % 2 != q % 2:
                continue
            h += h_mo[p // 2, q // 2] * (ad[p] @ a[q])
    # physicist <pq|rs> = chemist (PR|QS) with matching spins p/r and q/s
    for p in range(n_q):
        for q in range(n_q):
            for r in range(n_q):
                if p % 2 != r % 2:
                    continue
                for s in range(n_q):
                    if q % 2 != s % 2:
                        continue
                    val = g_mo[p // 2, r // 2, q // 2, s // 2]
                    if abs(val) < 1e-14:
                        continue
                    h += 0.5 * val * (ad[p] @ ad[q] @ a[s] @ a[r])
    assert np.max(np.abs(h - h.conj().T)) < 1e-10
    return h


def pauli_decompose(h, n_q, tol=1e-10):
    dim = 1 << n_q
    terms = []
    for labels in itertools.product("IXYZ", repeat=n_q):
        p = kron_chain([PAULI[l] for l in labels])
        c = np.sum(h * p.T) / dim
        assert abs(c.imag) < 1e-10
        if abs(c.real) > tol:
            terms.append(("".join(labels), float(c.real)))
    terms.sort(key=lambda t: (sum(ch != "I" for ch in t[0]), t[0]))
    return terms


def emit(path, name, geometry_lines, charges, n_elec, hf_bits):
    basis = Basis([r for _, r in charges])
    e_hf, e_nuc, h_mo, g_mo = rhf(basis, charges, n_elec)
    h = qubit_hamiltonian(e_nuc, h_mo, g_mo)
    n_q = 2 * h_mo.shape[0]
    terms = pauli_decompose(h, n_q)
    recon = sum(c * kron_chain([PAULI[l] for l in s]) for s, c in terms)
    assert np.max(np.abs(h - recon)) < 1e-9
    evals = np.linalg.eigvalsh(h)
    e0 = float(evals[0])
    hf_index = int(hf_bits, 2)
    e_hf_diag = float(h[hf_index, hf_index].real)
    assert abs(e_hf_diag - e_hf) < 1e-8, (e_hf_diag, e_hf)
    with open(path, "w") as f:
        f.write(f"# {name}, STO-3G, restricted Hartree-Fock reference\n")
        for line in geometry_lines:
            f.write(f"# {line}\n")
        f.write(
            "# mapping: Jordan-Wigner over molecular spin-orbitals; "
            "spin-orbital p = 2*MO + spin (0=alpha, 1=beta)\n"
        )
        f.write(
            "# qubit p = spin-orbital p; qubit 0 is the leftmost Pauli "
            "character (most significant bit)\n"
        )
        f.write(f"# Hartree-Fock occupation bitstring: {hf_bits}\n")
        f.write(f"# E_HF  = {e_hf:.12f} Ha\n")
        f.write(f"# E_FCI = {e0:.12f} Ha  (minimum eigenvalue, same basis)\n")
        f.write(f"# generated by tools/gen_hamiltonians.py; {len(terms)} terms\n")
        for s, c in terms:
            f.write(f"{c:.16e} {s}\n")
    print(f"{name}: n_qubits={n_q} terms={len(terms)}")
    print(f"  E_HF  = {e_hf:.12f}")
    print(f"  E_FCI = {e0:.12f}")
    return e0


def main():
    outdir = sys.argv[1] if len(sys.argv) > 1 else "data"
    r_h2 = 0.7414 * ANGSTROM_TO_BOHR
    emit(
        f"{outdir}/h2_sto3g_jw.ham",
        "H2",
        [f"geometry: H-H bond length 0.7414 Angstrom ({r_h2:.10f} Bohr)"],
        [(1.0, np.array([0.0, 0.0, 0.0])), (1.0, np.array([0.0, 0.0, r_h2]))],
        2,
        "1100",
    )
    side = 0.874 * ANGSTROM_TO_BOHR
    h3_geom = [
        (1.0, np.array([0.0, 0.0, 0.0])),
        (1.0, np.array([side, 0.0, 0.0])),
        (1.0, np.array([side / 2.0, side * np.sqrt(3.0) / 2.0, 0.0])),
    ]
    emit(
        f"{outdir}/h3plus_sto3g_jw.ham",
        "H3+ (equilateral)",
        [f"geometry: equilateral triangle, H-H side 0.874 Angstrom ({side:.10f} Bohr)"],
        h3_geom,
        2,
        "110000",
    )


if __name__ == "__main__":
    main()
