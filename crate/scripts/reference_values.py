"""Regenerate the frozen reference values used by the Rust test suites.

Every value here is computed independently of the Rust code: complex erf via
mpmath at 40 significant digits, gains and correlations by brute-force
summation over explicit element coordinates.  Run with `python3
scripts/reference_values.py` and paste the printed constants if anything
needs refreezing.
"""
import mpmath as mp

mp.mp.dps = 40

LAM = mp.mpf("0.125")
D = LAM / 2
AREA = LAM**2 / (4 * mp.pi)


def cosines(theta, phi):
    return (mp.sin(phi) * mp.cos(theta), mp.sin(phi) * mp.sin(theta), mp.cos(phi))


def element_coords(mx, mz):
    hx, hz = (mx - 1) // 2, (mz - 1) // 2
    for ix in range(-hx, hx + 1):
        for iz in range(-hz, hz + 1):
            yield ix * D, iz * D


def nusw_vector(mx, mz, r, theta, phi):
    cx, cy, cz = cosines(theta, phi)
    px, py, pz = r * cx, r * cy, r * cz
    out = []
    for sx, sz in element_coords(mx, mz):
        rm = mp.sqrt((px - sx) ** 2 + py**2 + (pz - sz) ** 2)
        amp = mp.sqrt(AREA * r * cy / (4 * mp.pi * rm**3))
        out.append(amp * mp.expj(-2 * mp.pi * rm / LAM))
    return out


def upw_vector(mx, mz, r, theta, phi):
    cx, cy, cz = cosines(theta, phi)
    amp = mp.sqrt(AREA * cy / (4 * mp.pi * r**2))
    out = []
    for sx, sz in element_coords(mx, mz):
        out.append(amp * mp.expj(-2 * mp.pi * r / LAM * (1 - sx * cx / r - sz * cz / r)))
    return out


def rho(hb, he):
    ip = mp.fsum(mp.conj(a) * b for a, b in zip(hb, he))
    gb = mp.fsum(abs(a) ** 2 for a in hb)
    ge = mp.fsum(abs(b) ** 2 for b in he)
    return abs(ip) ** 2 / (gb * ge), gb, ge


def show(name, v):
    if isinstance(v, mp.mpc):
        print(f"{name} = ({mp.nstr(v.real, 20)}, {mp.nstr(v.imag, 20)})")
    else:
        print(f"{name} = {mp.nstr(v, 20)}")


print("# erf(z)")
for z in [
    mp.mpc(0.5, 0.25), mp.mpc(1.5, 1.9), mp.mpc(3, -2), mp.mpc(-0.1, 4.5),
    mp.mpc(5.5, 5.5), mp.mpc(6.2, 0.3), mp.mpc(7.0, 1.0), mp.mpc(2.0, 8.0),
    mp.mpc(20.0, 19.0), mp.mpc(30.0, 35.0), mp.mpc(1e-8, 2e-8), mp.mpc(12.0, 0.0),
    mp.mpc(0.0, 6.0), mp.mpc(25, 25),
]:
    show(f"erf({mp.nstr(z.real, 8)}, {mp.nstr(z.imag, 8)})", mp.erf(z))

print("# threshold root of |erf(sqrt(pi) e^{j pi/4} u)/(2u)|^4 = 1/2")
f = lambda u: abs(mp.erf(mp.sqrt(mp.pi) * mp.expj(mp.pi / 4) * u) / (2 * u)) ** 4 - mp.mpf(1) / 2
ups = mp.findroot(f, 0.79)
show("upsilon_half", ups)

TH, PH = mp.pi / 3, 2 * mp.pi / 3
print("# NUSW direct gain, 51x51, r=10, (pi/3, 2pi/3)")
hb = nusw_vector(51, 51, mp.mpf(10), TH, PH)
show("nusw_gain_direct", mp.fsum(abs(a) ** 2 for a in hb))
print("# NUSW rho direct, 51x51, rb=10, re=20 co-directional")
he = nusw_vector(51, 51, mp.mpf(20), TH, PH)
show("nusw_rho_direct", rho(hb, he)[0])
print("# UPW rho direct, 51x51, r=10/20, (pi/3,2pi/3) vs (2pi/3,pi/3)")
show("upw_rho_cross", rho(upw_vector(51, 51, mp.mpf(10), TH, PH), upw_vector(51, 51, mp.mpf(20), 2 * mp.pi / 3, mp.pi / 3))[0])
