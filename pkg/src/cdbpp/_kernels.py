"""Fused loops for batched circuit simulation.

A compiled circuit is a list of blocks stored column-wise:

    kinds[t]   0 = diagonal phase block, 1 = Pauli rotation
    slots[t]   parameter index
    coeffs[t]  rotation coefficient (unused for diagonal blocks)
    xmasks[t]  X/Y bitplane of the rotation generator
    hbits[t]   highest set bit of xmasks[t]
    gfacs[t]   i**(number of Y letters)
    vecs[t]    diagonal values (kind 0) or +-1 signs with
               (P psi)[b] = gfacs[t] * vecs[t, b] * psi[b ^ xmasks[t]]   (kind 1)

Rows of ``psi`` are independent states and every loop handles each row on
its own, so a row's result never depends on what the other rows hold.
"""
from __future__ import annotations

import math

import numpy as np
from numba import njit


@njit(cache=True, fastmath=True)
def _rotate_row(psi, r, c, w, xmask, hbit, sgn):
    dim = psi.shape[1]
    for hi in range(0, dim, 2 * hbit):
        for b in range(hi, hi + hbit):
            bb = b ^ xmask
            a0 = psi[r, b]
            a1 = psi[r, bb]
            psi[r, b] = c * a0 + (w * sgn[b]) * a1
            psi[r, bb] = c * a1 + (w * sgn[bb]) * a0


@njit(cache=True, fastmath=True)
def _phase_row(psi, r, t, diag):
    for b in range(psi.shape[1]):
        a = -t * diag[b]
        psi[r, b] *= complex(math.cos(a), math.sin(a))


@njit(cache=True, fastmath=True)
def _apply_block(psi, r, theta, sign, kind, coeff, xmask, hbit, gfac, vec):
    if kind == 0:
        _phase_row(psi, r, sign * theta, vec)
    else:
        ang = theta * coeff
        _rotate_row(psi, r, math.cos(ang), -1j * sign * math.sin(ang) * gfac, xmask, hbit, vec)


@njit(cache=True, fastmath=True)
def forward(psi, params, kinds, slots, coeffs, xmasks, hbits, gfacs, vecs):
    """Apply all blocks in order, in place."""
    for t in range(kinds.shape[0]):
        for r in range(psi.shape[0]):
            _apply_block(psi, r, params[r, slots[t]], 1.0, kinds[t], coeffs[t],
                         xmasks[t], hbits[t], gfacs[t], vecs[t])


@njit(cache=True, fastmath=True)
def backward(phi, lam, params, grads, kinds, slots, coeffs, xmasks, hbits, gfacs, vecs):
    """Adjoint sweep; ``phi``/``lam`` start as the final state and ``H psi`` and are consumed.

    For a gate ``exp(-i theta c G)`` the contribution is ``2 c Im <lam|G|phi>``
    with ``phi`` the state just after the gate.
    """
    dim = phi.shape[1]
    for t in range(kinds.shape[0] - 1, -1, -1):
        for r in range(phi.shape[0]):
            vec = vecs[t]
            acc = 0j
            if kinds[t] == 0:
                for b in range(dim):
                    acc += np.conj(lam[r, b]) * vec[b] * phi[r, b]
                grads[r, slots[t]] += 2.0 * acc.imag
            else:
                x = xmasks[t]
                for b in range(dim):
                    acc += np.conj(lam[r, b]) * vec[b] * phi[r, b ^ x]
                grads[r, slots[t]] += 2.0 * coeffs[t] * (gfacs[t] * acc).imag
            theta = params[r, slots[t]]
            _apply_block(phi, r, theta, -1.0, kinds[t], coeffs[t], xmasks[t], hbits[t], gfacs[t], vec)
            _apply_block(lam, r, theta, -1.0, kinds[t], coeffs[t], xmasks[t], hbits[t], gfacs[t], vec)


@njit(cache=True, fastmath=True)
def expect_diag(psi, diag, out):
    for r in range(psi.shape[0]):
        acc = 0.0
        for b in range(psi.shape[1]):
            a = psi[r, b]
            acc += (a.real * a.real + a.imag * a.imag) * diag[b]
        out[r] = acc
