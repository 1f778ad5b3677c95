"""Command-line surface: run, test, debug, verify, shots, validate-factors,
tomo, serve.

Exit codes are stable: 0 success/pass, 1 check failed or invalid, 2
usage/parse/semantic error, 3 engine or runtime error. With --format json
stdout carries machine-readable output only; diagnostics go to stderr.
"""
from __future__ import annotations

import asyncio
import json
import sys
from pathlib import Path

import click

from . import debugger as dbg
from . import harness, service
from .engine import EngineConfig, execute
from .errors import (
    CapacityExceeded,
    CursorExhausted,
    DegenerateNorm,
    KernelCorruption,
    QdbError,
    SourceError,
    SuiteParseError,
)
from .qasm import diagnostics, load_file
from .state import QuantumState, index_to_bits

_ENGINE_ERRORS = (CapacityExceeded, KernelCorruption, DegenerateNorm, CursorExhausted)

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_USAGE = 2
EXIT_RUNTIME = 3


def _emit(payload: dict, fmt: str, text: str | None = None) -> None:
    if fmt == "json":
        click.echo(json.dumps(payload, sort_keys=True))
    else:
        click.echo(text if text is not None else json.dumps(payload, indent=2, sort_keys=True))


def _load_program(path: str, include_path: str | None):
    try:
        return load_file(path, include_path)
    except FileNotFoundError:
        click.echo(f"error: file not found: {path}", err=True)
        sys.exit(EXIT_USAGE)
    except SourceError as exc:
        source = Path(path).read_text(encoding="utf-8")
        click.echo(diagnostics.render(source, exc, path), err=True)
        sys.exit(EXIT_USAGE)


def _runtime_guard(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except _ENGINE_ERRORS as exc:
        click.echo(f"engine error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)


format_option = click.option(
    "--format", "fmt", type=click.Choice(["text", "json"]), default="text", help="Output format."
)
seed_option = click.option("--seed", type=int, default=0, show_default=True, help="RNG seed.")
include_option = click.option(
    "--include-path",
    envvar="QDB_INCLUDE_PATH",
    default=None,
    help="Directory searched for non-builtin includes (env: QDB_INCLUDE_PATH).",
)


@click.group()
@click.version_option(package_name="qdb")
def main() -> None:
    """OpenQASM 2.0 simulator and quantum program debugger."""


@main.command()
@click.argument("file", type=click.Path())
@click.option("--shots", type=int, default=1024, show_default=True)
@click.option(
    "--engine",
    type=click.Choice(["dense", "naive", "dense-inplace", "naive-matrix"]),
    default="dense",
    show_default=True,
)
@click.option("--statevector", is_flag=True, help="Record the final state (single shot only).")
@click.option("--trace", "trace_path", type=click.Path(), default=None,
              help="Write line-delimited JSON trace events to this file.")
@seed_option
@format_option
@include_option
def run(file, shots, engine, statevector, trace_path, seed, fmt, include_path) -> None:
    """Execute a program and print measurement counts."""
    _, ir = _load_program(file, include_path)
    if statevector and shots != 1:
        click.echo("note: --statevector only applies when --shots 1", err=True)
    config = EngineConfig(method=engine, seed=seed, record_statevector=statevector)
    trace_file = open(trace_path, "w", encoding="utf-8") if trace_path else None
    trace_cb = None
    if trace_file is not None:
        trace_cb = lambda event: trace_file.write(json.dumps(event.to_json(), sort_keys=True) + "\n")
    try:
        result = _runtime_guard(execute, ir, config, shots=shots, trace=trace_cb)
    finally:
        if trace_file is not None:
            trace_file.close()
    payload = result.to_json(include_elapsed=True)
    lines = [f"{k}: {v}" for k, v in sorted(result.counts.items())]
    if result.final_state is not None:
        lines.append("final state:")
        lines.extend(_format_snapshot(result.final_state))
    _emit(payload, fmt, "\n".join(lines))


def _format_snapshot(snapshot: dict) -> list[str]:
    n = snapshot["n_qubits"]
    out = []
    for i, (re, im) in enumerate(snapshot["amplitudes"]):
        p = re * re + im * im
        if p > 1e-12:
            out.append(f"|{index_to_bits(i, n)}>  {re:+.6f}{im:+.6f}i  p={p:.6f}")
    return out


@main.command()
@click.argument("suite", type=click.Path())
@format_option
@include_option
def test(suite, fmt, include_path) -> None:
    """Run a JSON test suite and report per-case verdicts."""
    try:
        report = harness.run_test_suite(suite, include_path)
    except SuiteParseError as exc:
        click.echo(f"suite error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    lines = [f"[{c['verdict'].upper():^12}] {c['name']}" for c in report.cases]
    lines.append(f"overall: {report.verdict}")
    _emit(report.to_json(), fmt, "\n".join(lines))
    sys.exit(report.exit_status)


@main.command()
@click.argument("file", type=click.Path())
@click.option("--engines", default="dense,naive", show_default=True,
              help="Comma-separated engine list to compare.")
@click.option("--shots", type=int, default=1024, show_default=True)
@seed_option
@format_option
@include_option
def verify(file, engines, shots, seed, fmt, include_path) -> None:
    """Run a program under multiple engines and compare the results."""
    _, ir = _load_program(file, include_path)
    try:
        configs = [EngineConfig(method=m.strip(), seed=seed) for m in engines.split(",")]
    except ValueError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    report = _runtime_guard(harness.cross_engine_verify, ir, configs, shots=shots)
    lines = [f"cross-engine: {'pass' if report.passed else 'fail'}"]
    for pair in report.pairwise:
        lines.append(
            f"  {pair['pair'][0]} vs {pair['pair'][1]}: {pair['verdict']}"
            f" (p={pair['p_value']:.4f}, tvd={pair['tvd']:.4f})"
        )
    if report.state_check is not None:
        lines.append(f"  states equal up to phase: {report.state_check.get('equal_up_to_phase')}")
    _emit(report.to_json(), fmt, "\n".join(lines))
    sys.exit(EXIT_OK if report.passed else EXIT_CHECK_FAILED)


@main.command()
@click.option("--epsilon", type=float, required=True, help="Max estimation error per outcome.")
@click.option("--delta", type=float, required=True, help="Failure probability.")
@format_option
def shots(epsilon, delta, fmt) -> None:
    """Chernoff-bound repetition sizing."""
    try:
        plan = harness.chernoff_shots(epsilon, delta)
    except QdbError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_USAGE)
    _emit(plan.to_json(), fmt, str(plan.shots))


@main.command("validate-factors")
@click.argument("n", type=str)
@click.option("--factors", required=True, help="Comma-separated factor list.")
@format_option
def validate_factors(n, factors, fmt) -> None:
    """Check a claimed factorization (arbitrary precision)."""
    try:
        value = int(n)
        factor_list = [int(x) for x in factors.split(",") if x.strip()]
    except ValueError:
        click.echo("error: N and factors must be integers", err=True)
        sys.exit(EXIT_USAGE)
    outcome = harness.validate_shor_factors(value, factor_list)
    text = "valid" if outcome.valid else f"invalid: {outcome.witness}"
    _emit(outcome.to_json(), fmt, text)
    sys.exit(EXIT_OK if outcome.valid else EXIT_CHECK_FAILED)


@main.command()
@click.argument("file", type=click.Path())
@click.option("--qubits", default="0", show_default=True, help="Comma-separated qubit list.")
@click.option("--shots", "shots_", type=int, default=None,
              help="Shots per Pauli setting (omit for exact expectations).")
@seed_option
@format_option
@include_option
def tomo(file, qubits, shots_, seed, fmt, include_path) -> None:
    """Tomographic reconstruction of the state a program prepares."""
    _, ir = _load_program(file, include_path)
    try:
        qubit_list = [int(q) for q in qubits.split(",") if q.strip()]
    except ValueError:
        click.echo("error: --qubits must be a comma-separated integer list", err=True)
        sys.exit(EXIT_USAGE)
    try:
        result = dbg.tomography(ir, qubit_list, shots_, EngineConfig(seed=seed))
    except QdbError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_RUNTIME)
    purity = result.estimate.purity()
    lines = [f"qubits: {qubit_list}", f"purity: {purity:.6f}", "estimate:"]
    for row in result.estimate.matrix:
        lines.append("  " + "  ".join(f"{v.real:+.4f}{v.imag:+.4f}i" for v in row))
    _emit(result.to_json(), fmt, "\n".join(lines))


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=7459, show_default=True)
@click.option("--stdio", is_flag=True, help="Serve over stdin/stdout instead of TCP.")
@click.option("--ws-port", type=int, default=None,
              help="Also serve the protocol over WebSocket on this port.")
@include_option
def serve(host, port, stdio, ws_port, include_path) -> None:
    """Expose debug sessions over the wire protocol (see PROTOCOL.md)."""

    async def _run() -> None:
        if stdio:
            await service.serve_stdio(include_path=include_path)
            return
        tasks = [asyncio.create_task(service.serve_tcp(host, port, include_path=include_path))]
        click.echo(f"listening on {host}:{port}", err=True)
        if ws_port is not None:
            tasks.append(
                asyncio.create_task(service.serve_websocket(host, ws_port, include_path=include_path))
            )
            click.echo(f"websocket on {host}:{ws_port}", err=True)
        await asyncio.gather(*tasks)

    try:
        asyncio.run(_run())
    except KeyboardInterrupt:
        pass


# --- the REPL ------------------------------------------------------------------------


@main.command()
@click.argument("file", type=click.Path())
@click.option("--mode", type=click.Choice(["omniscient", "device"]), default="omniscient",
              show_default=True)
@click.option("--budget", type=int, default=dbg.DEFAULT_SHOT_BUDGET, show_default=True,
              help="Shot budget for statistical queries.")
@seed_option
@format_option
@include_option
def debug(file, mode, budget, seed, fmt, include_path) -> None:
    """Interactive line-oriented debugger (scriptable via stdin)."""
    source, ir = _load_program(file, include_path)
    session = dbg.DebugSession(ir, seed=seed, mode=mode, shot_budget=budget, source=source)
    repl = _Repl(session, fmt)
    repl.banner(file)
    for line in sys.stdin:
        if not repl.dispatch(line):
            break


class _Repl:
    """Line-oriented REPL over a DebugSession; every verb prints one block."""

    def __init__(self, session: dbg.DebugSession, fmt: str):
        self.session = session
        self.fmt = fmt

    def say(self, payload: dict, text: str | None = None) -> None:
        _emit(payload, self.fmt, text)

    def banner(self, file: str) -> None:
        ir = self.session.ir
        self.say(
            {"loaded": file, "n_qubits": ir.n_qubits, "n_clbits": ir.n_clbits,
             "instructions": len(ir.instructions)},
            f"loaded {file}: {ir.n_qubits} qubits, {len(ir.instructions)} instructions",
        )

    def dispatch(self, line: str) -> bool:
        parts = line.strip().split()
        if not parts:
            return True
        verb, args = parts[0], parts[1:]
        if verb in ("quit", "exit"):
            return False
        handler = getattr(self, "do_" + verb.replace("-", "_"), None)
        if handler is None:
            self.say(
                {"error": f"unknown verb {verb!r}"},
                f"unknown verb {verb!r} - try: step continue break state prob sep "
                "clone-exact clone-approx tomo mode shots quit",
            )
            return True
        try:
            handler(args)
        except QdbError as exc:
            self.say({"error": f"{type(exc).__name__}: {exc}"}, f"error: {exc}")
        except (ValueError, IndexError) as exc:
            self.say({"error": str(exc)}, f"usage error: {exc}")
        return True

    def _report_assertions(self, assertions) -> None:
        for result in assertions:
            self.say(
                {"assertion": result.to_json()},
                f"assert {result.directive.kind}: {result.verdict}",
            )

    def do_step(self, args) -> None:
        event, assertions = self.session.step()
        self._report_assertions(assertions)
        if event is None:
            self.say({"finished": True}, "already at end")
        else:
            ref = self.session.ir.source_map[event.index]
            self.say(
                {"stepped": event.to_json(), "position": self.session.cursor.position},
                f"[{event.index}] {ref.text}",
            )

    def do_continue(self, args) -> None:
        info = self.session.continue_()
        self._report_assertions(info.assertions)
        where = self.session.ir.source_map[info.position].text if info.reason == "breakpoint" else ""
        self.say(
            {"stopped": info.reason, "position": info.position},
            f"stopped ({info.reason}) at instruction {info.position} {where}".rstrip(),
        )

    def do_break(self, args) -> None:
        index = self.session.set_breakpoint(line=int(args[0]))
        self.say(
            {"breakpoint": index},
            f"breakpoint at instruction {index}: {self.session.ir.source_map[index].text}",
        )

    def do_state(self, args) -> None:
        payload = self.session.inspect_state()
        if "snapshot" in payload:
            self.say(payload, "\n".join(_format_snapshot(payload["snapshot"])) or "|0...0>")
        else:
            lines = [f"{k}: {v}" for k, v in sorted(payload["histogram"].items())]
            self.say(payload, "\n".join(lines) or "(no samples)")

    def do_prob(self, args) -> None:
        payload = self.session.qubit_probability(int(args[0]))
        if "p0" in payload:
            self.say(payload, f"q{args[0]}: p0={payload['p0']:.6f} p1={payload['p1']:.6f}")
        else:
            self.say(payload, f"q{args[0]}: p1~{payload['p1_estimate']:.4f} ({payload['shots']} shots)")

    def do_sep(self, args) -> None:
        report = self.session.separability_report()
        lines = [
            f"q{e.qubit}: purity={e.purity:.6f} {'entangled' if e.entangled else 'separable'}"
            for e in report.per_qubit
        ]
        self.say(report.to_json(), "\n".join(lines))

    def do_clone_exact(self, args) -> None:
        src = [int(x) for x in args[0].split(",")]
        dst = [int(x) for x in args[1].split(",")]
        report = self.session.exact_clone_orthogonal(src, dst)
        self.say(report.to_json(), f"cloned qubits {src} onto {dst}")

    def do_clone_approx(self, args) -> None:
        source = int(args[0])
        blanks = [int(x) for x in args[1].split(",")] if len(args) > 1 else None
        if blanks is None:
            used = {source}
            blanks = [q for q in range(self.session.ir.n_qubits) if q not in used][:2]
        report = self.session.universal_clone(source, blanks)
        if report.fidelities:
            text = (
                f"copies on q{report.copy_qubits[0]}, q{report.copy_qubits[1]}; "
                f"fidelities {report.fidelities[0]:.6f}, {report.fidelities[1]:.6f}"
            )
        else:
            text = f"copies on q{report.copy_qubits[0]}, q{report.copy_qubits[1]}"
        self.say(report.to_json(), text)

    def do_tomo(self, args) -> None:
        qubits = [int(x) for x in args[0].split(",")]
        shots = int(args[1]) if len(args) > 1 else None
        result = self.session.tomography(qubits, shots)
        self.say(
            result.to_json(),
            f"tomography over {qubits}: purity={result.estimate.purity():.6f}",
        )

    def do_mode(self, args) -> None:
        self.session.set_mode(args[0])
        self.say({"mode": self.session.mode}, f"mode: {self.session.mode}")

    def do_shots(self, args) -> None:
        self.session.shot_budget = int(args[0])
        self.say({"shot_budget": self.session.shot_budget}, f"budget: {self.session.shot_budget}")


if __name__ == "__main__":
    main()
