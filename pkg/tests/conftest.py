from __future__ import annotations

from hypothesis import settings, strategies as st

from ruitenburg.formula import BOT, And, Implies, Or, Var

settings.register_profile("default", deadline=None, max_examples=100)
settings.load_profile("default")


def formulas(names=("x", "y"), max_leaves: int = 12, bottom: bool = True):
    leaves = [Var(n) for n in names] + ([BOT] if bottom else [])
    binary = st.sampled_from([And, Or, Implies])
    return st.recursive(
        st.sampled_from(leaves),
        lambda kids: st.builds(lambda op, a, b: op(a, b), binary, kids, kids),
        max_leaves=max_leaves,
    )
