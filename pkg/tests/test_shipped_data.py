"""The sample content shipped in data/ must always load and make sense."""

from pathlib import Path

from pathlab.algorithms import shortest_cost
from pathlab.challenges import ChallengeKind
from pathlab.graph import DEFAULT_TABLE
from pathlab.server import Engine
from pathlab.skygraph import PuzzleKind, check_solution, generate_puzzle
from pathlab.terrain import load_map

DATA = Path(__file__).resolve().parents[1] / "data"


def test_data_directory_loads():
    engine = Engine(data_dir=DATA)
    assert set(engine.maps) == {"detour5", "island12"}
    assert set(engine.books) == {
        "astar-basics", "bfs-basics", "cycles-basics", "dijkstra-basics",
    }
    assert len(engine.challenges) == 5
    assert set(engine.tables) >= {"default", "flatland"}


def test_challenge_gates_reference_shipped_books():
    engine = Engine(data_dir=DATA)
    for challenge in engine.challenges.values():
        if challenge.gate:
            assert challenge.gate in engine.books, challenge.id
        if challenge.kind != ChallengeKind.SKY_PUZZLE:
            assert challenge.map_ref in engine.maps, challenge.id


def test_pick_endpoints_target_is_achievable():
    engine = Engine(data_dir=DATA)
    c = engine.challenges["price-is-right"]
    world = load_map(engine.maps[c.map_ref])
    snap = world.scan_surface()
    target = float(c.params["target"])
    assert shortest_cost(snap, DEFAULT_TABLE, (0, 0), (6, 0)) == target


def test_sky_puzzle_challenge_is_solvable():
    engine = Engine(data_dir=DATA)
    c = engine.challenges["one-loop-to-break"]
    puzzle = generate_puzzle(
        PuzzleKind(c.params["puzzle_kind"]), int(c.params["size"]), int(c.params["seed"])
    )
    verdict = check_solution(puzzle, puzzle.witness, edits=puzzle.budget)
    assert verdict.status.value == "solved"


def test_shipped_maps_round_trip():
    from pathlab.terrain import save_map

    for map_path in sorted(DATA.glob("maps/*.map")):
        text = map_path.read_text()
        assert save_map(load_map(text)) == text, map_path.name
