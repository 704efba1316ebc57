from pathlib import Path

import pytest

from lbmfd import catalog
from lbmfd.linalg import RingPoly, faddeev_leverrier
from lbmfd.reduce import (
    AnnihilationError,
    bootstrap_plan,
    from_json,
    reduce_multi,
    reduce_single,
    reduce_with,
    render,
    to_json,
)
from lbmfd.scheme import build

from conftest import op, poly
from reference_schemes import fd_schemes, two_step_d1q3

GOLDEN = Path(__file__).parent / "golden"


def test_d1q3_render_matches_golden():
    fd = reduce_single(build(catalog.d1q3()))
    assert render(fd) + "\n" == (GOLDEN / "d1q3_derive.txt").read_text()


def test_d1q3_stencils():
    assert reduce_single(build(catalog.d1q3())) == fd_schemes()["d1q3"][0]


def test_unit_rate_gives_two_steps():
    b = build(catalog.d1q3().substitute(p=1))
    fd = reduce_single(b)
    assert fd.K == 2 and fd == two_step_d1q3()
    # the untrimmed polynomial is X times the trimmed one, its last lag is empty
    assert reduce_single(b, trim=False) == fd


@pytest.mark.parametrize("name", sorted(catalog.CATALOG))
def test_json_round_trip(name):
    for fd in reduce_multi(build(catalog.get(name))):
        back = from_json(to_json(fd))
        assert back == fd and back.provenance == fd.provenance
        assert to_json(back) == to_json(fd)


def test_paths_agree_on_generic_scheme():
    b = build(catalog.d1q3())
    ref = reduce_single(b)
    assert reduce_single(b, path="minimal") == ref
    assert reduce_single(b, path="mpafr") == ref
    with pytest.raises(ValueError, match="unknown path"):
        reduce_single(b, path="bogus")


def test_mpafr_shortens_link_schemes():
    b = build(catalog.link(2))
    assert reduce_single(b).K == 5
    assert reduce_single(b, path="mpafr").K == 2


def test_bootstrap_plan():
    b = build(catalog.d1q3())
    assert bootstrap_plan(b, reduce_single(b)).warmup_steps == 2
    b = build(catalog.link(3))
    plan = bootstrap_plan(b, reduce_single(b, path="mpafr"))
    assert plan.warmup_steps == 1 and not plan.is_empty()


def test_non_annihilating_polynomial_is_rejected():
    b = build(catalog.d1q3())
    with pytest.raises(AnnihilationError):
        reduce_with(b, poly(1, "0", "-1", "1"))
    with pytest.raises(ValueError, match="monic"):
        reduce_with(b, poly(1, "0", "2"))


def test_custom_polynomial_multiple_of_charpoly():
    b = build(catalog.d1q3())
    chi = faddeev_leverrier(b.A)
    longer = reduce_with(b, chi * poly(1, "-1", "1"))
    assert longer.K == 4
    # the extra root X = 1 adds the previous update to the stencils
    assert longer.h[0] == reduce_single(b).h[0] + op("1")


def test_reduce_single_requires_one_conserved():
    with pytest.raises(ValueError):
        reduce_single(build(catalog.d1q3_two()))


def test_render_lists_terms_by_lag():
    text = render(fd_schemes()["d1q2"][0])
    assert text.splitlines()[0].startswith("m1[n+1] = + [")
    assert text.splitlines()[-1].endswith("m1[n-1]")
