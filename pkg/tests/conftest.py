"""Shared arbitrary-precision oracles (test side only)."""
import mpmath as mp
import pytest
from hypothesis import settings

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

mp.mp.dps = 40


def g11_mp(m, a, q, y):
    """G^{1,1}_{2,3} of the family via mpmath's general Meijer G."""
    return mp.meijerg([[-m], [m + 2 * a + 1]], [[2 * a + 1], [0, q]], y)


def g21_mp(m, a, q, y):
    """G^{2,1}_{2,3} of the family via mpmath's general Meijer G."""
    return mp.meijerg([[-m - 2 * a - 1], [m]], [[0, -q], [-2 * a - 1]], y)


def g21_incgamma_mp(m, a, q, y):
    """G21 through its incomplete-gamma decomposition, in mpmath."""
    y = mp.mpf(y)
    total = (-1) ** m * y ** (-q) * mp.exp(-y)
    for k in range(m):
        r = (-1) ** k * mp.rf(2 * a + 2 + k, m) / (mp.factorial(k) * mp.factorial(m - 1 - k))
        total += r * y ** k * mp.gammainc(-q - k, y)
    return total


def g11_residues(m, a, q, y):
    """Left-pole residue sum of the G11 contour integrand, written out by hand.

    Integrand Gamma(b1 + s) Gamma(1 - a1 - s) / (Gamma(1 - b2 - s) Gamma(1 - b3 - s) Gamma(a2 + s)) y**-s
    with a1 = -m, a2 = m + 2a + 1, b1 = 2a + 1, b2 = 0, b3 = q; poles at s = -b1 - k.
    """
    a1, a2, b1, b2, b3 = -m, m + 2 * a + 1, 2 * a + 1, 0, q
    total = mp.mpf(0)
    for k in range(200):
        term = ((-1) ** k / mp.factorial(k) * mp.gamma(1 - a1 + b1 + k)
                * mp.rgamma(1 - b2 + b1 + k) * mp.rgamma(1 - b3 + b1 + k) * mp.rgamma(a2 - b1 - k)
                * mp.mpf(y) ** (b1 + k))
        total += term
        if k > m + 5 and abs(term) < mp.mpf(10) ** -35 * abs(total):
            break
    return total


@pytest.fixture
def mpctx():
    with mp.workdps(40):
        yield mp


# one line per acceptance criterion, printed in the terminal summary
ACCEPTANCE_LINES = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
