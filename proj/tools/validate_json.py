#!/usr/bin/env python3
"""Validate JSON outputs against the schemas in docs/schemas.

usage: validate_json.py SCHEMA_DIR NAME=FILE [NAME=FILE ...]

NAME is a schema file stem, e.g. eval_report=out/eval_report.json.
Exit status is 0 when every file validates, 1 otherwise.
"""

import argparse
import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def load_registry(schema_dir: pathlib.Path) -> Registry:
    resources = []
    for path in sorted(schema_dir.glob("*.schema.json")):
        schema = json.loads(path.read_text())
        resources.append((path.name, Resource.from_contents(schema)))
    return Registry().with_resources(resources)


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("schema_dir", type=pathlib.Path)
    parser.add_argument("pairs", nargs="+", metavar="NAME=FILE")
    args = parser.parse_args()

    registry = load_registry(args.schema_dir)
    failures = 0
    for pair in args.pairs:
        name, _, file = pair.partition("=")
        schema_name = f"{name}.schema.json"
        try:
            schema = registry.contents(schema_name)
        except Exception:
            print(f"{file}: no schema named {schema_name}", file=sys.stderr)
            failures += 1
            continue
        validator_cls = jsonschema.validators.validator_for(schema)
        validator = validator_cls(schema, registry=registry)
        try:
            document = json.loads(pathlib.Path(file).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            print(f"{file}: {exc}", file=sys.stderr)
            failures += 1
            continue
        errors = sorted(validator.iter_errors(document), key=lambda e: list(e.path))
        for err in errors:
            where = "/".join(str(p) for p in err.path) or "<root>"
            print(f"{file}: {where}: {err.message}", file=sys.stderr)
        failures += bool(errors)
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
