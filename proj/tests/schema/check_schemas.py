# Copyright 2026 The hilo Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Validates captured API responses against the published schemas.

Usage: check_schemas.py <schema dir> <sample dir>

Samples are named <schema>-<tag>.json. Every schema must have at least one
sample, and every sample must name a known schema.
"""

import json
import pathlib
import sys

import jsonschema
from referencing import Registry, Resource


def main(schema_dir: pathlib.Path, sample_dir: pathlib.Path) -> int:
    schemas = {}
    registry = Registry()
    for path in sorted(schema_dir.glob("*.schema.json")):
        doc = json.loads(path.read_text())
        jsonschema.Draft202012Validator.check_schema(doc)
        registry = registry.with_resource(path.name, Resource.from_contents(doc))
        schemas[path.name.removesuffix(".schema.json")] = doc

    failures = 0
    seen = set()
    samples = sorted(sample_dir.glob("*.json"))
    if not samples:
        print(f"no samples in {sample_dir}")
        return 1
    for path in samples:
        name = path.stem.split("-", 1)[0]
        if name not in schemas:
            print(f"FAIL {path.name}: no schema named {name}")
            failures += 1
            continue
        seen.add(name)
        validator = jsonschema.Draft202012Validator(schemas[name], registry=registry)
        errors = sorted(validator.iter_errors(json.loads(path.read_text())), key=lambda e: list(e.path))
        for err in errors:
            print(f"FAIL {path.name}: /{'/'.join(map(str, err.path))}: {err.message}")
        failures += len(errors)
        if not errors:
            print(f"ok   {path.name}")

    for name in sorted(set(schemas) - seen):
        print(f"FAIL {name}: no sample response")
        failures += 1
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main(pathlib.Path(sys.argv[1]), pathlib.Path(sys.argv[2])))
