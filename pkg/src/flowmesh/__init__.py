"""flowmesh: compose independently built gRPC components into running solutions.

Subsystems:

- ``flowmesh.proto3``   -- proto3 subset parser and interface typing
- ``flowmesh.blueprint``-- solution graph model, validation, classification
- ``flowmesh.runtime``  -- threaded message-relay engine with cycle support
- ``flowmesh.control``  -- gRPC control service and event log export
- ``flowmesh.packager`` -- deterministic deployment-bundle generation
- ``flowmesh.refkit``   -- reference components for integration testing
- ``flowmesh.cli``      -- operator command line
"""

__version__ = "0.1.0"
