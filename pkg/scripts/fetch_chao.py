#!/usr/bin/env python3
"""Best-effort downloader for the public team-orienteering benchmark.

Tries the known distribution URLs and unpacks everything into data/chao/.
Needs outbound network access; in closed environments fetch the archives by
hand and unzip them into that directory instead (see data/README.md).
"""

import io
import os
import sys
import urllib.request
import zipfile

SETS = {
    1: "Set_32_234",
    2: "Set_21_234",
    3: "Set_33_234",
    4: "Set_100_234",
    5: "Set_66_234",
    6: "Set_64_234",
    7: "Set_102_234",
}

BASES = [
    "https://www.mech.kuleuven.be/en/cib/op/instances/Chao/TOP/",
    "https://www.mech.kuleuven.be/en/cib/op@op-instances/Chao/TOP/",
]


def main():
    dest = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), "data", "chao")
    os.makedirs(dest, exist_ok=True)
    got_any = False
    for set_id, archive in sorted(SETS.items()):
        for base in BASES:
            url = f"{base}{archive}.zip"
            try:
                with urllib.request.urlopen(url, timeout=30) as resp:
                    payload = resp.read()
            except Exception as exc:
                print(f"set {set_id}: {url} -> {exc}")
                continue
            with zipfile.ZipFile(io.BytesIO(payload)) as zf:
                for name in zf.namelist():
                    base_name = os.path.basename(name)
                    if not base_name or not base_name.startswith("p"):
                        continue
                    with zf.open(name) as fh:
                        out = os.path.join(dest, base_name)
                        with open(out, "wb") as dst:
                            dst.write(fh.read())
            print(f"set {set_id}: unpacked {archive}.zip")
            got_any = True
            break
    if not got_any:
        print(
            "nothing fetched; download the seven Set_*.zip archives manually "
            f"and unzip the p*.txt files into {dest}"
        )
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
