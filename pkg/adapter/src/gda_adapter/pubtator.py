"""Batch download of precomputed annotations in the PubTator abstract format.

The exporter endpoint returns concatenated blocks (``PMID|t|``, ``PMID|a|``,
tab-separated mention rows).  Every block is offset-checked against its own
text before being written out; blocks that fail validation and PMIDs the
service does not return are reported, never silently dropped.  The HTTP
callable is injectable so tests run without network access.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

EXPORT_URL = "https://www.ncbi.nlm.nih.gov/research/pubtator3-api/publications/export/pubtator"
BATCH_SIZE = 100
REQUEST_GAP_SECONDS = 0.34  # at most ~3 requests/second


@dataclass
class FetchResult:
    blocks: list[str] = field(default_factory=list)
    missing: list[str] = field(default_factory=list)
    failed: dict[str, str] = field(default_factory=dict)

    @property
    def text(self) -> str:
        return "\n\n".join(self.blocks) + ("\n" if self.blocks else "")


def default_http_get(url: str) -> tuple[int, str]:
    import requests

    response = requests.get(url, timeout=60)
    return response.status_code, response.text


def _split_blocks(payload: str) -> list[str]:
    blocks = []
    current: list[str] = []
    for line in payload.splitlines():
        if line.strip():
            current.append(line)
        elif current:
            blocks.append("\n".join(current))
            current = []
    if current:
        blocks.append("\n".join(current))
    return blocks


def validate_block(block: str) -> tuple[str, str | None]:
    """Return (pmid, error) for one block; error is None when offsets check out."""
    title = abstract = None
    pmid = ""
    for line in block.splitlines():
        if "|t|" in line and title is None:
            pmid, _, title = line.split("|", 2)
        elif "|a|" in line and abstract is None:
            _, _, abstract = line.split("|", 2)
        elif "\t" in line:
            cols = line.split("\t")
            if len(cols) < 5:
                return pmid, f"short annotation row: {line!r}"
            if title is None:
                return pmid, "annotation row before title"
            doc_text = title if abstract is None else f"{title} {abstract}"
            try:
                start, end = int(cols[1]), int(cols[2])
            except ValueError:
                return pmid, f"non-numeric offsets in {line!r}"
            data = doc_text.encode("utf-8")
            if not 0 <= start < end <= len(data):
                return pmid, f"offsets {start}..{end} outside document"
            try:
                piece = data[start:end].decode("utf-8")
            except UnicodeDecodeError:
                return pmid, f"offsets {start}..{end} split a character"
            if piece != cols[3]:
                return pmid, f"offsets {start}..{end} slice {piece!r}, not {cols[3]!r}"
    if title is None:
        return pmid, "block without a title line"
    return pmid, None


def fetch_pubtator(
    pmids: Sequence[str],
    http_get: Callable[[str], tuple[int, str]] | None = None,
    sleep: Callable[[float], None] = time.sleep,
) -> FetchResult:
    """Fetch annotation blocks for a PMID list, batched and rate-limited."""
    http_get = http_get or default_http_get
    wanted = [p.strip() for p in pmids if p.strip()]
    result = FetchResult()
    seen: set[str] = set()
    for at in range(0, len(wanted), BATCH_SIZE):
        batch = wanted[at : at + BATCH_SIZE]
        if at:
            sleep(REQUEST_GAP_SECONDS)
        url = f"{EXPORT_URL}?pmids={','.join(batch)}"
        try:
            status, payload = http_get(url)
        except Exception as exc:  # noqa: BLE001 - per-batch failures are recorded
            for pmid in batch:
                result.failed[pmid] = f"request error: {exc}"
            continue
        if status != 200:
            for pmid in batch:
                result.failed[pmid] = f"HTTP {status}"
            continue
        for block in _split_blocks(payload):
            pmid, error = validate_block(block)
            if error is not None:
                result.failed[pmid or "?"] = error
                continue
            if pmid in seen:
                continue
            seen.add(pmid)
            result.blocks.append(block)
    result.missing = [p for p in wanted if p not in seen and p not in result.failed]
    return result


def read_pmid_list(path) -> list[str]:
    out = []
    with open(path, encoding="utf-8") as handle:
        for line in handle:
            line = line.strip()
            if line and not line.startswith("#"):
                out.append(line)
    return out
