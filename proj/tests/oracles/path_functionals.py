"""Fine-step Monte Carlo reference values for the amplitude regression fixtures.

Potential V(x) = 2 exp(-|x|^2). Drifted Brownian motion G_t = t e1 + B_t is
sampled exactly on a dt = 1e-3 grid; the Bessel-drift diffusion uses Euler
steps at the same dt with p(r) = coth(r) - 1/r. Independent numpy streams,
no code shared with the C++ engine.
"""
import numpy as np

DT = 1e-3
T_MAX = 16.0
N = 100_000
CHUNK = 10_000


def V(x):
    return 2.0 * np.exp(-np.einsum("ij,ij->i", x, x))


def drift_bessel(x):
    r = np.sqrt(np.einsum("ij,ij->i", x, x))
    with np.errstate(divide="ignore", invalid="ignore"):
        p = np.where(r < 1e-2, r / 3 - r**3 / 45 + 2 * r**5 / 945,
                     1 / np.tanh(r) - 1 / r)
        u = np.where(r[:, None] > 0, x / r[:, None], 0.0)
    return p[:, None] * u


def run(kind, seed):
    rng = np.random.default_rng(seed)
    absI = []
    steps = int(round(T_MAX / DT))
    theta = np.array([1.0, 0.0, 0.0])
    for _ in range(N // CHUNK):
        x = np.zeros((CHUNK, 3))
        I = np.zeros(CHUNK)
        v0 = V(x)
        for _ in range(steps):
            b = theta if kind == "const" else drift_bessel(x)
            x = x + b * DT + np.sqrt(DT) * rng.standard_normal((CHUNK, 3))
            v1 = V(x)
            I += 0.5 * DT * (v0 + v1)
            v0 = v1
        absI.append(I)
    return np.concatenate(absI)


def report(name, w):
    print(f"{name}: mean = {w.mean():.6f}  stderr = {w.std(ddof=1)/np.sqrt(len(w)):.6f}")


if __name__ == "__main__":
    I = run("const", 20240611)
    report("a(e1)", np.exp(-0.5 * I))
    b = np.exp(-0.5j * I)
    print(f"b(e1, lambda=1): re = {b.real.mean():.6f} ({b.real.std(ddof=1)/np.sqrt(N):.6f})"
          f"  im = {b.imag.mean():.6f} ({b.imag.std(ddof=1)/np.sqrt(N):.6f})")
    report("mean integral", I)
    Ib = run("bessel", 7)
    report("bessel", np.exp(-0.5 * Ib))
