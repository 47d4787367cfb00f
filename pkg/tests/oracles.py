"""Reference computations written independently of the package internals.

Loops and numpy.linalg only; nothing here calls the package's contraction,
square root or spin code.
"""

import itertools

import numpy as np


def eigh_sqrt(m):
    w, v = np.linalg.eigh((m + m.conj().T) / 2)
    return (v * np.sqrt(np.clip(w, 0, None))) @ v.conj().T


def star_oracle(t, u):
    r = eigh_sqrt(u)
    x = r @ t @ r
    return x / np.trace(x)


def kron_loops(a, b):
    n, m = a.shape[0], b.shape[0]
    out = np.zeros((n * m, n * m), dtype=complex)
    for i, j, k, l in itertools.product(range(n), range(n), range(m), range(m)):
        out[i * m + k, j * m + l] = a[i, j] * b[k, l]
    return out


def random_density(dim, rng, rank=None):
    rank = dim if rank is None else rank
    g = rng.normal(size=(dim, rank)) + 1j * rng.normal(size=(dim, rank))
    m = g @ g.conj().T
    return m / np.trace(m).real


def random_pure(dim, rng):
    v = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    v /= np.linalg.norm(v)
    return np.outer(v, v.conj())


RHO0 = np.array([[0, 0], [0, 1]], dtype=complex)
RHO1 = np.array([[1, 0], [0, 0]], dtype=complex)


# Dutch relative clause, transcribed index by index from the worked calculation.
# Tensors are the lexicon's spatial data reshaped to (rows..., cols...).

def np_oracle(de, hond):
    """H[a, a'] = Σ_{c,c'} de[(a,c),(a',c')] hond[c',c]"""
    de4 = de.reshape(2, 2, 2, 2)
    out = np.zeros((2, 2), dtype=complex)
    for a, a2, c, c2 in itertools.product(range(2), repeat=4):
        out[a, a2] += de4[a, c, a2, c2] * hond[c2, c]
    return out


def first_contraction_oracle(H, bijt):
    """Σ_{j,j'} H[j,j'] bijt[(j',p,q),(j,p',q')]: the noun phrase in the verb's first slot."""
    b = bijt.reshape(2, 2, 2, 2, 2, 2)
    out = np.zeros((2, 2, 2, 2), dtype=complex)
    for j, j2, p, q, p2, q2 in itertools.product(range(2), repeat=6):
        out[p, q, p2, q2] += H[j, j2] * b[j2, p, q, j, p2, q2]
    return out


def clause_subject(H, bijt):
    """Relative clause with the noun phrase as object: it fills the verb's first slot."""
    return first_contraction_oracle(H, bijt)


def clause_object(H, bijt):
    """Relative clause with the noun phrase as subject: it fills the verb's second slot."""
    b = bijt.reshape(2, 2, 2, 2, 2, 2)
    out = np.zeros((2, 2, 2, 2), dtype=complex)
    for j, j2, n, m, n2, m2 in itertools.product(range(2), repeat=6):
        out[n, m, n2, m2] += H[j, j2] * b[n, j2, m, n2, j, m2]
    return out


def phrase_oracle(M, D, clause):
    """out[t,t'] = Σ M[r,r'] D[(r',t,m,n),(r,t',m',n')] clause[(n',m'),(n,m)]"""
    d = D.reshape(2, 2, 2, 2, 2, 2, 2, 2)
    out = np.zeros((2, 2), dtype=complex)
    for t, t2, r, r2, m, m2, n, n2 in itertools.product(range(2), repeat=8):
        out[t, t2] += M[r, r2] * d[r2, t, m, n, r, t2, m2, n2] * clause[n2, m2, n, m]
    return out
