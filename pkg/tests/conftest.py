import math
import random
from fractions import Fraction

import pytest

from klsc.geometry import KahlerPotentialDeriv
from klsc.radial_expr import Annulus, RadialFunction

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_dphi(rng: random.Random) -> str:
    """phi' as a positive combination of terms whose product with z is increasing."""
    terms = []
    for p in rng.sample(["1", "z^(1/2)", "z", "z^(3/2)", "z^2"], rng.randint(1, 3)):
        terms.append(f"{rng.randint(1, 9)}/{rng.randint(1, 5)}*{p}")
    extra = rng.choice(["", "1/(1+{b}*z)", "log(1+{b}*z)/z", "1/z", "atan({b}*z)/z"])
    if extra:
        terms.append(f"{rng.randint(1, 5)}*" + extra.format(b=Fraction(rng.randint(1, 9), rng.randint(1, 4))))
    return " + ".join(terms)


def random_potential(rng: random.Random, n: int | None = None,
                     domain: Annulus = Annulus(0.1, 10.0)) -> KahlerPotentialDeriv:
    n = n or rng.choice([2, 3, 4])
    return KahlerPotentialDeriv.from_string(n, domain, random_dphi(rng))


def random_factor(rng: random.Random, domain: Annulus = Annulus(0.1, 10.0)) -> RadialFunction:
    """A positive radial function."""
    a, b = rng.randint(1, 5), rng.randint(1, 5)
    q = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
    choice = rng.choice([
        f"{a} + {b}*z^({q})",
        f"exp({q}*z/{b})",
        f"(1+z)^({q})",
        f"{a} + log(1+{b}*z)",
        f"z^({q})*(2+atan(z))",
    ])
    return RadialFunction.parse(choice, domain)


@pytest.fixture
def rng():
    return random.Random(20240611)


WHOLE = Annulus(0.0, math.inf)
