from __future__ import annotations

from functools import lru_cache

from cuspgeom.cusped_space import build_cusped_space
from cuspgeom.group_ball import PresentationSpec, cayley_ball, enumerate_peripheral_cosets


@lru_cache(maxsize=None)
def group_model(peripherals: tuple, radius: int, depth: int, rank: int = 2):
    """Cusped model of F_rank relative to the given peripheral words or factors (cached)."""
    spec = PresentationSpec.free(rank, list(peripherals))
    ball = cayley_ball(spec, radius)
    return spec, build_cusped_space(ball, enumerate_peripheral_cosets(ball, spec), depth)


ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def record(criterion: int, ok: bool, detail: str) -> bool:
    """Log one acceptance verdict; the lines are echoed in the terminal summary."""
    ACCEPTANCE[criterion] = (bool(ok), detail)
    print(f"criterion {criterion}: {'PASS' if ok else 'FAIL'} {detail}")
    return bool(ok)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
