"""Arbitrary-precision reference values for the special-function unit tests."""
import mpmath as mp

mp.mp.dps = 40


def drift_magnitude(r):
    # I'_{1/2}(r)/I_{1/2}(r) - 1/(2r), straight from the Bessel functions.
    nu = mp.mpf(1) / 2
    return mp.besseli(nu, r, derivative=1) / mp.besseli(nu, r) - nu / r


if __name__ == "__main__":
    for r in ["0.001", "0.01", "0.5", "1", "2", "10"]:
        print(f"p({r}) =", mp.nstr(drift_magnitude(mp.mpf(r)), 20))
    print("coth(1)-1 =", mp.nstr(mp.coth(1) - 1, 20))
    print("coth(2)-1/2 =", mp.nstr(mp.coth(2) - mp.mpf(1) / 2, 20))
    print("e^-1/(4pi) =", mp.nstr(mp.exp(-1) / (4 * mp.pi), 20))
    print("1/sinh(1) =", mp.nstr(1 / mp.sinh(1), 20))
    print("2/sinh(2) =", mp.nstr(2 / mp.sinh(2), 20))
    # Ratio of I_{3/2}/I_{1/2} for the general-nu continued fraction check.
    for nu in ["0.5", "1", "2.5"]:
        nu = mp.mpf(nu)
        print(f"I_(nu+1)/I_nu (nu={nu}, r=1.7) =",
              mp.nstr(mp.besseli(nu + 1, 1.7) / mp.besseli(nu, 1.7), 20))
        print(f"p_nu (nu={nu}, r=1.7) =",
              mp.nstr(mp.besseli(nu, 1.7, derivative=1) / mp.besseli(nu, 1.7) - nu / mp.mpf(1.7), 20))
