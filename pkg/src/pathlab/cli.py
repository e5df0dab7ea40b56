"""Headless command line: run comparisons, query the oracle, verify
puzzles, or start the session server."""

from __future__ import annotations

import argparse
import asyncio
import math
import sys
from pathlib import Path

from .algorithms import (
    AlgorithmKind,
    AlgorithmSpec,
    brute_force_shortest,
    export_trace,
    run_parallel,
)
from .errors import EngineError
from .graph import DEFAULT_TABLE, Heuristic, load_weight_table
from .skygraph import PuzzleKind, check_solution, generate_puzzle, load_graph, save_graph
from .terrain import load_map


def _parse_cell(text: str) -> tuple[int, int]:
    try:
        x, z = text.split(",")
        return int(x), int(z)
    except ValueError:
        raise SystemExit(f"expected 'x,z', got {text!r}")


def _parse_algo(text: str) -> AlgorithmSpec:
    parts = text.split(":")
    kind = AlgorithmKind(parts[0])
    heuristic = Heuristic(parts[1]) if len(parts) > 1 and parts[1] else Heuristic.OCTILE
    label = parts[2] if len(parts) > 2 else ""
    return AlgorithmSpec(kind, heuristic, label)


def _load_world_table(args):
    world = load_map(Path(args.map).read_text())
    table = DEFAULT_TABLE
    if args.weights:
        table = load_weight_table(Path(args.weights).read_text())
    return world, table


def cmd_run(args) -> int:
    world, table = _load_world_table(args)
    snapshot = world.scan_surface()
    specs = [_parse_algo(a) for a in args.algo] or [AlgorithmSpec(AlgorithmKind.DIJKSTRA)]
    traces, report = run_parallel(specs, snapshot, table, args.start, args.goal)
    print(report.table())
    for trace in traces:
        if trace.found:
            cells = " ".join(f"{n.x},{n.z}" for n in trace.path)
            print(f"path[{trace.spec.label}]: {cells}")
        else:
            print(f"path[{trace.spec.label}]: unreachable")
    if args.trace_out:
        out = Path(args.trace_out)
        out.mkdir(parents=True, exist_ok=True)
        for trace in traces:
            target = out / f"{trace.spec.label}.trace"
            target.write_text(export_trace(trace))
            print(f"wrote {target}")
    return 0


def cmd_oracle(args) -> int:
    world, table = _load_world_table(args)
    snapshot = world.scan_surface()
    cost = brute_force_shortest(
        snapshot, table, args.start, args.goal, cap=args.cap
    )
    print("unreachable" if math.isinf(cost) else repr(cost))
    return 0


def cmd_verify_puzzle(args) -> int:
    puzzle = generate_puzzle(PuzzleKind(args.kind), args.size, args.seed)
    print(f"kind:   {puzzle.kind.value}")
    print(f"prompt: {puzzle.prompt}")
    print(f"goal:   {puzzle.goal.describe()}")
    print(f"budget: {puzzle.budget}")
    print(f"nodes:  {puzzle.initial.node_count}  edges: {puzzle.initial.edge_count}")
    witness_verdict = check_solution(puzzle, puzzle.witness, edits=puzzle.budget)
    print(f"stored solution check: {witness_verdict.status.value}")
    if args.dump_graph:
        Path(args.dump_graph).write_text(save_graph(puzzle.initial))
        print(f"wrote {args.dump_graph}")
    if args.graph:
        submitted = load_graph(Path(args.graph).read_text())
        verdict = check_solution(puzzle, submitted, edits=args.edits)
        print(f"submitted graph: {verdict.status.value}"
              + (f" ({verdict.reason})" if verdict.reason else ""))
        return 0 if verdict.status.value == "solved" else 1
    return 0 if witness_verdict.status.value == "solved" else 1


def _parse_listen(text: str) -> tuple[str, int]:
    host, _, port = text.rpartition(":")
    return host or "127.0.0.1", int(port)


def cmd_serve(args) -> int:
    from .server import Engine, serve_tcp, websocket_app

    engine = Engine(
        data_dir=args.data_dir,
        batch_size=args.batch,
        default_speed=args.speed,
    )

    async def main_loop():
        tasks = []
        if args.listen:
            host, port = _parse_listen(args.listen)
            server = await serve_tcp(engine, host, port)
            print(f"tcp listening on {host}:{port}")
            tasks.append(asyncio.create_task(server.serve_forever()))
        if args.ws_listen:
            import uvicorn

            host, port = _parse_listen(args.ws_listen)
            config = uvicorn.Config(
                websocket_app(engine), host=host, port=port, log_level="warning"
            )
            print(f"websocket listening on {host}:{port}")
            tasks.append(asyncio.create_task(uvicorn.Server(config).serve()))
        if not tasks:
            raise SystemExit("serve needs --listen and/or --ws-listen")
        await asyncio.gather(*tasks)

    try:
        asyncio.run(main_loop())
    except KeyboardInterrupt:
        pass
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pathlab",
        description="Weighted-grid pathfinding engine with traced runs and puzzles",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run_p = sub.add_parser("run", help="run algorithms over a map and print metrics")
    run_p.add_argument("--map", required=True)
    run_p.add_argument("--weights")
    run_p.add_argument("--start", required=True, type=_parse_cell)
    run_p.add_argument("--goal", required=True, type=_parse_cell)
    run_p.add_argument(
        "--algo",
        action="append",
        default=[],
        help="bfs | dijkstra | astar[:octile|euclidean|zero][:label], repeatable",
    )
    run_p.add_argument("--trace-out", help="directory for trace exports")
    run_p.set_defaults(func=cmd_run)

    oracle_p = sub.add_parser("oracle", help="exact shortest-path cost by brute force")
    oracle_p.add_argument("--map", required=True)
    oracle_p.add_argument("--weights")
    oracle_p.add_argument("--start", required=True, type=_parse_cell)
    oracle_p.add_argument("--goal", required=True, type=_parse_cell)
    oracle_p.add_argument("--cap", type=int, default=4096)
    oracle_p.set_defaults(func=cmd_oracle)

    verify_p = sub.add_parser("verify-puzzle", help="generate a puzzle and verify solvability")
    verify_p.add_argument("--kind", required=True, choices=[k.value for k in PuzzleKind])
    verify_p.add_argument("--size", required=True, type=int)
    verify_p.add_argument("--seed", required=True, type=int)
    verify_p.add_argument("--graph", help="check this graph document as a solution")
    verify_p.add_argument("--edits", type=int, default=None, help="edit count for --graph")
    verify_p.add_argument("--dump-graph", help="write the puzzle's initial graph here")
    verify_p.set_defaults(func=cmd_verify_puzzle)

    serve_p = sub.add_parser("serve", help="start the session server")
    serve_p.add_argument("--listen", help="tcp HOST:PORT for newline-delimited JSON")
    serve_p.add_argument("--ws-listen", help="websocket HOST:PORT (for the browser UI)")
    serve_p.add_argument("--data-dir", help="maps/books/challenges/telemetry directory")
    serve_p.add_argument("--speed", type=float, default=4.0, help="default playback steps/s")
    serve_p.add_argument("--batch", type=int, default=32, help="max step events per message")
    serve_p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except EngineError as exc:
        print(f"error ({exc.code}): {exc.message}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
