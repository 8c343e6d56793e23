"""
Running sketches and synthesized mechanisms with real noise.
"""
import logging
from dataclasses import replace
from typing import Any, FrozenSet, List, Mapping, Optional, Sequence

import numpy as np

from app.core.exceptions import ExecutionError
from app.exec.interpreter import Runtime, compile_program, loop_cap
from app.exec.sampling import make_rng
from app.exec.transformed import bind_inputs
from app.lang.ast import Program, Sample, While, WhilePriv, iter_commands, map_commands

logger = logging.getLogger(__name__)


def sample_names(p: Program) -> FrozenSet[str]:
    return frozenset(c.name for _, c in iter_commands(p.body) if isinstance(c, Sample))


def plain_loops(p: Program) -> Program:
    """p with every while-priv loop run as a plain while loop."""
    def rewrite(c):
        return While(c.cond, c.body, c.span) if isinstance(c, WhilePriv) else c

    return replace(p, body=map_commands(p.body, rewrite))


def run_mechanism(
    m: Program,
    inputs: Mapping[str, Any],
    lam: Sequence[float] = (),
    zeroed: FrozenSet[str] = frozenset(),
    seed: Optional[int] = None,
    rng: Optional[np.random.Generator] = None,
    replay: Optional[Sequence[float]] = None,
    theta: Sequence[float] = (),
    gamma: Sequence[float] = (),
) -> List[Any]:
    """
    Run a sketch or a synthesized mechanism.

    Samples named in `zeroed` are the constant 0 and draw nothing. With
    `replay` the draws are taken from that list in order instead of the
    generator.

    Args:
        m: Program with sampling statements
        inputs: Public and private parameter values, and optionally the budget
        lam: Scale hole values of a sketch
        zeroed: Samples replaced by 0
        seed: Seed of a fresh generator, used when rng is None
        rng: Generator to draw from
        replay: Fixed draws
        theta: Alignment hole values referenced by budget guards
        gamma: Bound hole values referenced by budget guards

    Returns:
        List[Any]: Values of `out` commands followed by the return variable

    Raises:
        InvalidScaleError: A retained sample got a non-positive scale
        IterationCapError: A loop ran past the iteration cap
    """
    retained = sample_names(m) - zeroed
    has_while_priv = any(isinstance(c, WhilePriv) for _, c in iter_commands(m.body))
    if has_while_priv:
        if retained:
            raise ExecutionError("while-priv loops with noise need a finalized budget guard")
        m = plain_loops(m)
    env = bind_inputs(m.decl, inputs, inputs)
    rt = Runtime(
        theta=theta,
        lam=lam,
        gamma=gamma,
        loop_cap=loop_cap(env),
        rng=rng if rng is not None else make_rng(seed),
        replay=replay,
        zeroed=zeroed,
    )
    compile_program(m).run(env, rt)
    outputs = list(rt.outputs)
    if m.decl.ret_name in env:
        outputs.append(env[m.decl.ret_name])
    return outputs


def noise_free(p: Program, inputs: Mapping[str, Any]) -> List[Any]:
    """Output of p with every sample fixed to 0."""
    return run_mechanism(p, inputs, zeroed=sample_names(p))
