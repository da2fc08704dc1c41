from hypothesis import settings
from hypothesis import strategies as st

from heisendyn.core import RingElement

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")

small = st.integers(-3, 3)
sites = st.tuples(small, small, small)


@st.composite
def ring_elements(draw, max_terms=4, coef=st.integers(-4, 4)):
    terms = draw(st.dictionaries(sites, coef, max_size=max_terms))
    return RingElement(terms)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
