from fractions import Fraction

from hypothesis import settings, strategies as st

from ratdim.supernatural import INF, SupernaturalNumber

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

SMALL_PRIMES = [2, 3, 5, 7, 11]


@st.composite
def supernaturals(draw, allow_universal=False):
    if allow_universal and draw(st.integers(0, 9)) == 0:
        return SupernaturalNumber.universal_number()
    primes = draw(st.lists(st.sampled_from(SMALL_PRIMES), unique=True, max_size=3))
    return SupernaturalNumber.of({p: draw(st.one_of(st.just(INF), st.integers(1, 4))) for p in primes})


def rationals(max_num=50, max_den=30):
    return st.builds(Fraction, st.integers(-max_num, max_num), st.integers(1, max_den))


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(results):
        terminalreporter.write_line(results[n])
