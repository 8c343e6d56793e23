"""
Command handlers. Each takes the parsed arguments and returns an exit code.
"""
import json
import logging
import os
from argparse import Namespace
from typing import Optional, Tuple

from app.align.program import TransformedProgram, load_transformed
from app.align.transform import transform
from app.cegis.candidate import Candidate
from app.cegis.finalize import finalize
from app.cegis.synthesis import synthesize
from app.cegis.utility import UtilitySpec, mean_accuracy
from app.cegis.verify import check_candidate
from app.core.config import settings
from app.core.exceptions import DPSynthError, InputError
from app.exec.mechanism import run_mechanism
from app.exec.sampling import derive_seeds
from app.lang.ast import Program
from app.lang.parser import parse_file
from app.lang.pretty import pretty
from app.lang.validate import errors, validate
from app.schemas import CandidateModel, CheckReport, RunConfig, SynthesisReport, UtilitySpecModel
from app.sketch.generator import generate_sketch

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_FAILED = 2
EXIT_REFUTED = 3


def _read(path: str) -> str:
    if not os.path.isfile(path):
        raise InputError(f"{path}: file not found")
    with open(path, encoding="utf-8") as handle:
        return handle.read()


def _write(text: str, path: Optional[str]) -> None:
    if path:
        with open(path, "w", encoding="utf-8") as handle:
            handle.write(text + "\n")
        logger.info("wrote %s", path)
    else:
        print(text)


def _source(path: str) -> Program:
    _read(path)
    return parse_file(path)


def _utility(args: Namespace) -> UtilitySpec:
    if args.utility != "custom":
        return UtilitySpec()
    path = args.sample_input or settings.CUSTOM_SAMPLE_INPUT
    if not path:
        raise InputError("the custom utility needs --sample-input")
    return UtilitySpecModel.model_validate_json(_read(path)).to_spec()


def synth(args: Namespace) -> int:
    """
    Synthesize a mechanism and write its report.

    Returns:
        int: EXIT_OK; SynthesisFailed propagates to the caller
    """
    src = _source(args.file)
    cfg = RunConfig.from_settings(
        seed=args.seed,
        jobs=args.jobs,
        iterations=args.iterations,
        particles=args.particles,
        query_count=args.query_count,
        round_scales=False if args.no_round else None,
        utility=args.utility,
    )
    result = synthesize(src, _utility(args), cfg)
    report = SynthesisReport.from_result(result)
    _write(report.model_dump_json(by_alias=True, indent=2), args.output)
    if args.emit_dsl:
        _write(pretty(result.mechanism), args.emit_dsl)
    return EXIT_OK


def _checked(args: Namespace) -> Tuple[TransformedProgram, Program, CandidateModel]:
    """Transformed program, keep-all mechanism and candidate named by the check arguments."""
    proof = CandidateModel.model_validate_json(_read(args.proof)) if args.proof else None
    if args.mechanism.endswith(".json"):
        _read(args.mechanism)
        t = load_transformed(args.mechanism)
        if t.mechanism is None:
            raise InputError(f"{args.mechanism}: fixture has no mechanism text")
        return t, t.mechanism, proof or CandidateModel.from_candidate(Candidate.reference(t))
    if proof is None:
        raise InputError("checking a source program needs a proof file")
    src = _source(args.mechanism)
    found = errors(validate(src))
    if found:
        raise InputError("; ".join(str(d) for d in found))
    enabled = frozenset(proof.locations) if proof.locations is not None else None
    sk = generate_sketch(src, enabled=enabled)
    t = transform(sk)
    cand = proof.to_candidate()
    if (len(cand.theta), len(cand.lam), len(cand.gamma)) != (t.theta_count, t.lambda_count, t.gamma_count):
        raise InputError(
            f"proof has {len(cand.theta)}/{len(cand.lam)}/{len(cand.gamma)} holes, "
            f"{sk.name} needs {t.theta_count}/{t.lambda_count}/{t.gamma_count}"
        )
    return t, finalize(sk, t, cand, keep_all=True), proof


def check(args: Namespace) -> int:
    """
    Try to refute a candidate.

    Returns:
        int: EXIT_OK when verified, EXIT_REFUTED otherwise
    """
    t, mechanism, proof = _checked(args)
    cfg = RunConfig.from_settings(
        seed=args.seed,
        refutation_rounds=args.rounds,
        paired_trials=args.trials,
        iterations=args.iterations,
        particles=args.particles,
        query_count=args.query_count,
    )
    result = check_candidate(t, proof.to_candidate(), mechanism, cfg)
    report = CheckReport.from_result(t.name, result, proof, cfg)
    _write(report.model_dump_json(by_alias=True, indent=2), args.output)
    return EXIT_OK if result.ok else EXIT_REFUTED


def run(args: Namespace) -> int:
    """
    Run a finalized mechanism on a concrete input.

    Returns:
        int: EXIT_OK
    """
    m = _source(args.mechanism)
    sample = UtilitySpecModel.model_validate_json(_read(args.input))
    if args.eps is not None:
        sample.public_inputs[m.decl.budget if m.decl else "eps"] = args.eps
    seeds = derive_seeds(args.seed, args.reps)
    if args.stats:
        if not args.source:
            raise InputError("--stats needs --source")
        value = mean_accuracy(_source(args.source), m, sample.to_spec(), seeds)
        print(f"runs: {len(seeds)}")
        print(f"mean utility: {value:.4f}")
        return EXIT_OK
    for s in seeds:
        print(json.dumps(run_mechanism(m, sample.inputs, seed=s)))
    return EXIT_OK


def fixtures(args: Namespace) -> int:
    """
    Parse and validate every program of a fixture directory.

    Returns:
        int: EXIT_OK when every fixture loads, EXIT_INPUT otherwise
    """
    directory = args.directory
    if not os.path.isdir(directory):
        raise InputError(f"{directory}: not a directory")
    status = EXIT_OK
    for name in sorted(os.listdir(directory)):
        path = os.path.join(directory, name)
        try:
            if name.endswith(".dp"):
                p = parse_file(path)
                found = errors(validate(p))
                params = ", ".join(prm.name for prm in p.decl.params) if p.decl else ""
                state = "ok" if not found else f"{len(found)} errors"
            elif name.endswith("_transformed.json"):
                t = load_transformed(path)
                params = ", ".join(prm.name for prm in t.decl.params)
                state = "pre-transformed"
            else:
                continue
        except DPSynthError as exc:
            params, state = "", f"error: {exc}"
        if not state.startswith(("ok", "pre-transformed")):
            status = EXIT_INPUT
        print(f"{name}\t{params}\t{state}")
    return status
