"""Synthetic note pipelines: identity simulation, AEG/SPI generation,
reply parsing and validation, corpus mixing, and chat-format training export.

AEG asks the model to invent a note and its PHI from scratch (template
includes the format examples); SPI plants a simulated identity inside a
structured record and asks for a note that uses it verbatim.
"""

from __future__ import annotations

import hashlib
import json
import logging
import random
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from datetime import datetime
from importlib import resources
from pathlib import Path

from .entities import (
    ENTITY_TYPES,
    NoteRecord,
    PhiDictionary,
    normalize_mention,
    parse_phi_dictionary,
    serialize_phi_dictionary,
)
from .errors import (
    ConfigError,
    EmptyPool,
    MissingGold,
    MissingMarker,
    ParseError,
    SchemaError,
)
from .prompts import (
    ANNOTATION_SYSTEM,
    build_aeg_prompt,
    build_spi_prompt,
    build_task_prompt,
)
from .transports import Transport, build_transport

log = logging.getLogger("lppa.synth")

GENDERS = ("male", "female", "unknown")
SECTIONS = ("allergy", "diagnosis", "lab", "medication", "treatment")
TIME_FORMAT = "%Y-%m-%d %H:%M:%S"

_PHONE_SHAPE = re.compile(r"\d{3}-\d{3}-\d{4}")
_ZIP5 = re.compile(r"(?<!\d)\d{5}(?!\d)")
_PHI_MARKER = re.compile(r"PHI\s*:", re.IGNORECASE)
_NOTE_PREFIX = re.compile(r"^\s*Clinical\s+Note\s*:\s*", re.IGNORECASE)


@dataclass(frozen=True)
class SimulatedIdentity:
    name: str
    phone: str
    address: str
    email: str | None = None

    def __post_init__(self) -> None:
        if not self.name.strip():
            raise SchemaError("identity name must be non-empty")
        if not _PHONE_SHAPE.fullmatch(self.phone):
            raise SchemaError(f"phone {self.phone!r} not in NNN-NNN-NNNN shape")
        if not _ZIP5.search(self.address):
            raise SchemaError(f"address {self.address!r} lacks a 5-digit ZIP")


@dataclass(frozen=True)
class StructuredRecord:
    patient: dict
    allergy: dict
    diagnosis: dict
    lab: dict
    medication: dict
    treatment: dict

    def __post_init__(self) -> None:
        gender = self.patient.get("gender")
        if gender not in GENDERS:
            raise SchemaError(f"patient gender must be one of {GENDERS}, got {gender!r}")
        for section_name in ("patient", *SECTIONS):
            for key, value in getattr(self, section_name).items():
                if key.endswith("time") and isinstance(value, str) and value:
                    try:
                        datetime.strptime(value, TIME_FORMAT)
                    except ValueError:
                        raise SchemaError(
                            f"{section_name}.{key}: {value!r} is not a"
                            f" '{TIME_FORMAT}' timestamp"
                        ) from None


@dataclass(frozen=True)
class GenerationJob:
    mode: str
    seed: int
    exemplars: tuple[str, ...] = ()
    record: StructuredRecord | None = None
    identity: SimulatedIdentity | None = None

    def __post_init__(self) -> None:
        if self.mode not in ("aeg", "spi"):
            raise ConfigError(f"mode must be 'aeg' or 'spi', got {self.mode!r}")
        if self.mode == "spi":
            if self.record is None or self.identity is None:
                raise ConfigError("spi jobs need a record and an identity")
            if not self.exemplars:
                raise ConfigError("spi jobs need at least one exemplar")


@dataclass(frozen=True)
class IdentityPools:
    female_first: tuple[str, ...]
    male_first: tuple[str, ...]
    last: tuple[str, ...]
    cities: tuple[tuple[str, str], ...]  # (city, state abbreviation)
    streets: tuple[str, ...]
    email_domains: tuple[str, ...]


def _pool_lines(path: Path) -> tuple[str, ...]:
    lines = tuple(
        stripped
        for raw in path.read_text(encoding="utf-8").splitlines()
        if (stripped := raw.strip())
    )
    if not lines:
        raise EmptyPool(f"pool file {path} is empty")
    return lines


def load_pools(directory: str | Path) -> IdentityPools:
    """Read the six pool files (one entry per line) from a directory."""
    directory = Path(directory)
    cities = []
    for line in _pool_lines(directory / "cities.txt"):
        city, _, state = line.rpartition(", ")
        if not city or not state:
            raise SchemaError(f"cities.txt: expected 'City, ST', got {line!r}")
        cities.append((city, state))
    return IdentityPools(
        female_first=_pool_lines(directory / "female_first.txt"),
        male_first=_pool_lines(directory / "male_first.txt"),
        last=_pool_lines(directory / "last.txt"),
        cities=tuple(cities),
        streets=_pool_lines(directory / "streets.txt"),
        email_domains=_pool_lines(directory / "email_domains.txt"),
    )


def default_pools() -> IdentityPools:
    root = resources.files("lppa") / "assets" / "pools"
    with resources.as_file(root) as directory:
        return load_pools(directory)


def simulate_identity(
    record: StructuredRecord,
    seed: int,
    pools: IdentityPools | None = None,
    *,
    with_email: bool = False,
) -> SimulatedIdentity:
    """Deterministic fake identity for a record: gender-matched name, phone,
    street address; optional email with a real provider domain."""
    pools = pools or default_pools()
    gender = record.patient["gender"]
    if gender == "female":
        first_pool = pools.female_first
    elif gender == "male":
        first_pool = pools.male_first
    else:
        first_pool = pools.female_first + pools.male_first
    for name, pool in [
        ("first names", first_pool),
        ("last names", pools.last),
        ("cities", pools.cities),
        ("streets", pools.streets),
        ("email domains", pools.email_domains),
    ]:
        if not pool:
            raise EmptyPool(f"no {name} available")
    rng = random.Random(seed)
    first = rng.choice(first_pool)
    last = rng.choice(pools.last)
    digits = [rng.randrange(10) for _ in range(10)]
    phone = "{}{}{}-{}{}{}-{}{}{}{}".format(*digits)
    number = rng.randrange(1, 10000)
    street = rng.choice(pools.streets)
    city, state = rng.choice(pools.cities)
    zip5 = f"{rng.randrange(100000):05d}"
    email = None
    if with_email:
        email = f"{first.lower()}.{last.lower()}{rng.randrange(100)}@{rng.choice(pools.email_domains)}"
    return SimulatedIdentity(
        name=f"{first} {last}",
        phone=phone,
        address=f"{number} {street}, {city}, {state} {zip5}",
        email=email,
    )


def parse_generation(reply: str) -> tuple[str, PhiDictionary]:
    """Split a generation reply at its last 'PHI:' marker into (note, phi)."""
    markers = list(_PHI_MARKER.finditer(reply))
    if not markers:
        raise MissingMarker("reply has no 'PHI:' marker")
    marker = markers[-1]
    note = reply[: marker.start()].strip()
    note = _NOTE_PREFIX.sub("", note).strip()
    if note.endswith(","):
        note = note[:-1].rstrip()
    if len(note) >= 2 and note[0] == '"' and note[-1] == '"':
        note = note[1:-1].strip()
    if not note:
        raise MissingMarker("no note text before the 'PHI:' marker")
    phi = parse_phi_dictionary(reply[marker.end() :])
    return note, phi


def validate_generated(
    note_text: str,
    phi: PhiDictionary,
    identity: SimulatedIdentity | None = None,
) -> list[str]:
    """Advisory checks on a generated pair; returns warnings, never raises."""
    warnings: list[str] = []
    comparable = " ".join(note_text.split()).casefold()
    for entity_type in ENTITY_TYPES:
        for mention in phi.mentions(entity_type):
            normalized = normalize_mention(mention)
            if not normalized:
                warnings.append(f"{entity_type} mention {mention!r} normalizes to empty")
            elif normalized not in comparable:
                warnings.append(f"{entity_type} mention {mention!r} not found in note")
    if identity is not None:
        fields = [("name", identity.name), ("phone", identity.phone), ("address", identity.address)]
        if identity.email:
            fields.append(("email", identity.email))
        for field_name, value in fields:
            if normalize_mention(value) not in comparable:
                warnings.append(f"identity field '{field_name}' ({value!r}) missing from note")
    return warnings


def mix_corpora(
    a: list[NoteRecord], b: list[NoteRecord], seed: int
) -> list[NoteRecord]:
    """Union of two corpora in a seeded uniform random order.

    Records of b whose ids collide with a (or earlier b entries) are re-id'd
    with a '-mix' suffix rather than dropped.
    """
    seen = {record.id for record in a}
    combined = list(a)
    for record in b:
        while record.id in seen:
            record = replace(record, id=record.id + "-mix")
        seen.add(record.id)
        combined.append(record)
    random.Random(seed).shuffle(combined)
    return combined


def training_messages(record: NoteRecord) -> dict:
    """Chat-format training example for one gold-annotated note."""
    if record.phi is None:
        raise MissingGold(f"note {record.id} has no gold annotations")
    prompt = build_task_prompt(record.text)
    return {
        "messages": [
            {"role": "system", "content": ANNOTATION_SYSTEM},
            {"role": "user", "content": prompt.user},
            {"role": "assistant", "content": serialize_phi_dictionary(record.phi)},
        ]
    }


def export_training_set(corpus: list[NoteRecord], path: str | Path) -> int:
    """Write one chat-format JSON line per record; returns the line count."""
    lines = [
        json.dumps(training_messages(record), ensure_ascii=False) for record in corpus
    ]
    Path(path).write_text("".join(line + "\n" for line in lines), encoding="utf-8")
    return len(lines)


def load_records(path: str | Path) -> list[StructuredRecord]:
    """Read structured records (JSONL, one object per line)."""
    records: list[StructuredRecord] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line:
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(f"{path}:{lineno}: invalid JSON: {exc}") from None
            if not isinstance(obj, dict):
                raise SchemaError(f"{path}:{lineno}: expected an object")
            unknown = set(obj) - {"patient", *SECTIONS}
            if unknown:
                raise SchemaError(f"{path}:{lineno}: unknown keys {sorted(unknown)}")
            try:
                records.append(
                    StructuredRecord(
                        patient=obj.get("patient", {}),
                        **{name: obj.get(name, {}) for name in SECTIONS},
                    )
                )
            except SchemaError as exc:
                raise SchemaError(f"{path}:{lineno}: {exc}") from None
    if not records:
        raise SchemaError(f"{path}: no records")
    return records


def default_records() -> list[StructuredRecord]:
    root = resources.files("lppa") / "assets" / "records" / "sample_records.jsonl"
    with resources.as_file(root) as path:
        return load_records(path)


def load_exemplars(directory: str | Path) -> list[str]:
    """Read exemplar note texts (*.txt, sorted by name) from a directory."""
    texts = [
        p.read_text(encoding="utf-8") for p in sorted(Path(directory).glob("*.txt"))
    ]
    if not texts:
        raise EmptyPool(f"no exemplar .txt files in {directory}")
    return texts


def default_exemplars() -> list[str]:
    root = resources.files("lppa") / "assets" / "exemplars"
    with resources.as_file(root) as directory:
        return load_exemplars(directory)


def derive_seed(master_seed: int, index: int) -> int:
    """Stable per-note seed so parallel generation matches sequential."""
    digest = hashlib.sha256(f"{master_seed}:{index}".encode()).digest()
    return int.from_bytes(digest[:8], "big")


def _run_job(job: GenerationJob, transport: Transport, note_id: str) -> NoteRecord:
    if job.mode == "aeg":
        request = build_aeg_prompt(1)
        identity = None
    else:
        request = build_spi_prompt(job.record, job.identity, job.exemplars[0])
        identity = job.identity
    reply = transport.send(request, seed=job.seed)
    note_text, phi = parse_generation(reply)
    for warning in validate_generated(note_text, phi, identity):
        log.warning("%s: %s", note_id, warning)
    return NoteRecord(id=note_id, text=note_text, phi=phi, source=job.mode)


def generate_corpus(
    mode: str,
    count: int,
    endpoint: Transport | str,
    master_seed: int,
    *,
    records: list[StructuredRecord] | None = None,
    exemplars: list[str] | None = None,
    pools: IdentityPools | None = None,
    parallelism: int = 1,
) -> list[NoteRecord]:
    """Generate `count` notes; per-note seeds derive from the master seed, so
    the output is identical for any parallelism level."""
    if mode not in ("aeg", "spi"):
        raise ConfigError(f"mode must be 'aeg' or 'spi', got {mode!r}")
    if count < 0:
        raise ConfigError("count must be >= 0")
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    transport = endpoint if hasattr(endpoint, "send") else build_transport(endpoint)
    if mode == "spi":
        records = records if records is not None else default_records()
        exemplars = exemplars if exemplars is not None else default_exemplars()
        if not records:
            raise ConfigError("spi generation needs at least one record")
        if not exemplars:
            raise ConfigError("spi generation needs at least one exemplar")

    def job_for(index: int) -> GenerationJob:
        seed = derive_seed(master_seed, index)
        if mode == "aeg":
            return GenerationJob(mode="aeg", seed=seed)
        record = records[index % len(records)]
        return GenerationJob(
            mode="spi",
            seed=seed,
            exemplars=(exemplars[index % len(exemplars)],),
            record=record,
            identity=simulate_identity(record, seed, pools),
        )

    def one(index: int) -> NoteRecord:
        return _run_job(job_for(index), transport, f"{mode}-{index:05d}")

    if parallelism == 1 or count <= 1:
        return [one(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, range(count)))
