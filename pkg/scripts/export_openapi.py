#!/usr/bin/env python3
"""Regenerate the committed OpenAPI schema from the live app definition."""

import json
from pathlib import Path

from trisim.econometrics import ModelSpec
from trisim.service import create_app


def main() -> None:
    repo = Path(__file__).resolve().parent.parent
    model = ModelSpec.load(repo / "models" / "model.json")
    app = create_app(model)
    schema = app.openapi()
    out = repo / "docs" / "api-schema.json"
    out.write_text(json.dumps(schema, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    print(f"schema written to {out}")


if __name__ == "__main__":
    main()
