#!/usr/bin/env python3
# Build a deployment bundle for the sudoku solution and write it as a zip.
# The blueprint carries one of everything the packager knows how to emit:
# a web UI, a model initializer, and a shared folder.

import argparse
from pathlib import Path

from flowmesh.blueprint import (
    Blueprint,
    Endpoint,
    Link,
    ModelInitializerNode,
    SharedFolderNode,
)
from flowmesh.packager import generate_bundle
from flowmesh.refkit import refkit_container


def blueprint() -> Blueprint:
    return Blueprint(
        name="sudoku",
        version="1",
        nodes=(
            refkit_container("gui", "sudoku-gui", "SudokuGUI", web_ui=True),
            refkit_container("evaluator", "sudoku-evaluator", "SudokuDesignEvaluator"),
            refkit_container("solver", "sudoku-solver", "OneShotAnswerSetSolver"),
            ModelInitializerNode("weights", "https://models.example.org/sudoku/weights.bin"),
            SharedFolderNode("boards", "2Gi", "/boards"),
        ),
        links=(
            Link(Endpoint("gui", "requestSudokuEvaluation"),
                 Endpoint("evaluator", "evaluateSudokuDesign")),
            Link(Endpoint("evaluator", "evaluateSudokuDesign"),
                 Endpoint("gui", "processEvaluationResult")),
            Link(Endpoint("evaluator", "callAnswersetSolver"),
                 Endpoint("solver", "solve")),
            Link(Endpoint("solver", "solve"),
                 Endpoint("evaluator", "receiveAnswersetSolverResult")),
            Link(Endpoint("weights"), Endpoint("solver")),
            Link(Endpoint("boards"), Endpoint("gui")),
            Link(Endpoint("boards"), Endpoint("evaluator")),
        ),
    )


def main() -> None:
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", type=Path, default=Path("dist/sudoku-bundle.zip"))
    ap.add_argument("--image", default="flowmesh/orchestrator:0.1",
                    help="orchestrator container image to reference")
    args = ap.parse_args()

    bundle = generate_bundle(blueprint(), orchestrator_image=args.image)
    args.out.parent.mkdir(parents=True, exist_ok=True)
    bundle.write_zip(args.out)

    print(f"wrote {args.out} ({args.out.stat().st_size} bytes)")
    for name in bundle.files:
        print(f"  {name:<40} {len(bundle.files[name]):>6} bytes")


if __name__ == "__main__":
    main()
