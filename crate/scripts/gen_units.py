"""Compute unit data (Minkowski unit, regulator, Galois label) for cyclic cubic fields.

Requires cypari2. Output is a TOML fragment per field on stdout; class-group
records are maintained by hand in the fixture files.
"""
import sys
import cypari2

pari = cypari2.Pari()
pari.set_real_precision(120)
pari.allocatemem(2 * 10**9)


def fields_of_conductor(f):
    hf = 2 if f % 9 == 0 else 0
    out = []
    b = 1
    while 27 * b * b <= 4 * f:
        if not (hf == 2 and b % 3 == 0):
            A = 4 * f - 27 * b * b
            a = int(pari.sqrtint(A)) if A >= 0 else -1
            if a >= 0 and a * a == A:
                if hf == 0:
                    if a % 3 == 1:
                        a = -a
                    P = [(f * (a - 3) + 1) // 27, (1 - f) // 3, 1, 1]
                else:
                    if a % 9 == 3:
                        a = -a
                    P = [-(f * a) // 27, -f // 3, 0, 1]
                out.append((a, b, P))
        b += 1
    return out


def run(f, wanted_label, pidx=None):
    res = []
    for (a, b, P) in fields_of_conductor(f):
        pol = pari(f"Pol({list(reversed(P))})")
        K = pari.bnfinit(pol, 1)
        G = pari.nfgaloisconj(K)
        # Frobenius prime as in the reference program
        q = 2
        while True:
            if f % q != 0 and pari.polisirreducible(pari(f"Mod(1,{q})*({pol})")):
                break
            q = int(pari.nextprime(q + 1))
        labels = {}
        for k in (1, 2):
            g = G[k]
            X = pari(f"x^{q}") - g
            v = pari.valuation(pari.norm(pari.Mod(X, pol)), q)
            labels[k] = q % f if v > 0 else (q * q) % f
        res.append(dict(a=a, b=b, P=P, K=K, G=G, labels=labels, q=q))
    return res


def emit(f, a_want=None, label=None):
    for d in run(f, label):
        if a_want is not None and (d["a"], d["b"]) != a_want:
            continue
        K, G = d["K"], d["G"]
        k = next((k for k, l in d["labels"].items() if l == label), 1) if label else 1
        if label is None:
            label = d["labels"][1]
        g = G[k]
        fu = K.bnf_get_fu()
        Reg = K.bnf_get_reg()
        roots = pari.polroots(pari(f"Pol({list(reversed(d['P']))})"), precision=450)
        rho = pari.real(roots[0])
        best = None
        for (i, j) in [(1, 0), (0, 1), (1, 1), (1, -1), (2, 1), (1, 2), (2, -1), (1, -2)]:
            eps = pari.lift(fu[0] ** i * fu[1] ** j)
            eps_s = pari.lift(pari.nfgaloisapply(K, g, eps))
            l1 = pari.log(pari.abs(pari.subst(eps, "x", rho)))
            l2 = pari.log(pari.abs(pari.subst(eps_s, "x", rho)))
            quot = (l1 * l1 + l1 * l2 + l2 * l2) / Reg
            if abs(float(quot) - 1) < 1e-20:
                best = eps
                reg = l1 * l1 + l1 * l2 + l2 * l2
                break
        assert best is not None, f"no Minkowski unit found for {f}"
        coeffs = [pari.polcoef(best, t) for t in range(3)]
        den = int(pari.denominator(pari(coeffs)))
        nums = [str(int(c * den)) for c in coeffs]
        regs = str(reg)[:82]
        print(f"# f={f} (a,b)=({d['a']},{d['b']}) labels={d['labels']} chosen={k} g={g}")
        print("[field]")
        print(f"f = {f}\na = {d['a']}\nb = {d['b']}")
        print("P = [" + ", ".join(f'"{c}"' for c in d["P"]) + "]")
        print(f"sigma = {label}")
        print("\n[units]")
        print("epsilon = [" + ", ".join(f'"{n}"' for n in nums) + "]")
        if den != 1:
            print(f'denominator = "{den}"')
        print(f'regulator = "{regs}"')
        print("precision = 60\n")
        sys.stdout.flush()


if __name__ == "__main__":
    f = int(sys.argv[1])
    label = int(sys.argv[2]) if len(sys.argv) > 2 and sys.argv[2] != "-" else None
    ab = tuple(map(int, sys.argv[3].split(","))) if len(sys.argv) > 3 else None
    emit(f, ab, label)
