"""Write the bundled fixtures as documents so the CLI can be tried on them.

    python3 demos/write_fixtures.py out/
"""

import sys
from pathlib import Path

from spatialcm import samples
from spatialcm.docio import serialize_document


def main(target: str = "demo-docs") -> None:
    out = Path(target)
    out.mkdir(parents=True, exist_ok=True)
    mm = samples.workshop_metamodel()
    docs = {
        "workshop.metamodel": mm,
        "workshop.frames": samples.workshop_frames(),
        "server-room.model": samples.server_room(mm),
        "site.model": samples.site_model(mm),
    }
    for level in range(5):
        docs[f"machine-op-L{level}.model"] = samples.machine_operation(level, mm)
    for name, doc in docs.items():
        path = out / f"{name}.json"
        path.write_text(serialize_document(doc), encoding="utf-8")
        print(path)
    (out / "context-serverroom.json").write_text('{"user_zone": "serverroom"}\n', encoding="utf-8")
    (out / "context-office.json").write_text('{"user_zone": "office"}\n', encoding="utf-8")


if __name__ == "__main__":
    main(*sys.argv[1:])
