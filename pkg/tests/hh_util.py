"""Turn a random line instance into calc text for the bundle calculus."""


def line_text(desc: dict) -> str:
    s = "N_line"
    if desc["twist"]:
        s += f"({desc['twist']})"
    if desc["divisor"]:
        terms = []
        for name, c in desc["divisor"].items():
            coef = "" if abs(c) == 1 else str(abs(c))
            terms.append(("-" if c < 0 else "+") + coef + name)
        body = "".join(terms)
        s += "(" + (body[1:] if body[0] == "+" else body) + ")"
    for name, k, targets in desc["mods"]:
        s += f"[{k if k > 1 else ''}{name}->{'+'.join(targets)}]"
    if desc["gens"]:
        s += "; indep " + " ".join(desc["gens"])
    return s
