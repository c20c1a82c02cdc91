#!/usr/bin/env python3
"""Run the counter -> doubler -> recorder chain on loopback servers.

Builds the blueprint in code, deploys one in-process gRPC server per node,
lets the orchestrator relay for a few seconds, then prints the tail of the
event log and the drain summary.  Good first contact with the moving parts.
"""

import argparse
import time

from flowmesh.blueprint import Blueprint, Endpoint, Link, classify
from flowmesh.refkit import LocalDeployment, refkit_container
from flowmesh.runtime import EventLog, RuntimeConfig, build_runtime


def pipeline() -> Blueprint:
    return Blueprint(
        name="pipeline",
        version="1",
        nodes=(
            refkit_container("counter", "counter", "Counter"),
            refkit_container("doubler", "doubler", "Doubler"),
            refkit_container("recorder", "recorder", "Recorder"),
        ),
        links=(
            Link(Endpoint("counter", "Get"), Endpoint("doubler", "apply")),
            Link(Endpoint("doubler", "apply"), Endpoint("recorder", "Visualize")),
        ),
    )


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--seconds", type=float, default=3.0, help="how long to relay")
    ap.add_argument("--interval", type=float, default=0.0,
                    help="pause between source calls (0 = flat out)")
    ap.add_argument("--tail", type=int, default=8, help="event-log lines to show")
    args = ap.parse_args()

    blueprint = pipeline()
    log = EventLog(200_000)
    config = RuntimeConfig(source_interval=args.interval)

    with LocalDeployment(blueprint) as deployment:
        runtime = build_runtime(classify(blueprint), deployment.endpoints,
                                config=config, event_log=log)
        runtime.start()
        time.sleep(args.seconds)
        summary = runtime.stop()
        delivered = len(deployment["recorder"].hashes())

    print(f"delivered {delivered} messages in {args.seconds:.1f}s "
          f"({delivered / args.seconds:.0f}/s)")
    print(f"\nlast {args.tail} events:")
    for line in log.export().splitlines()[-args.tail:]:
        print(" ", line)
    print("\ndrain summary:")
    for link_id, stats in summary.to_dict()["links"].items():
        print(f"  {link_id}: produced={stats['produced']} "
              f"consumed={stats['consumed']} dropped={stats['dropped']}")


if __name__ == "__main__":
    main()
