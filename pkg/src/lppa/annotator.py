"""PHI annotation client: prompt dispatch, retries, and ordered batch runs."""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

from .entities import NoteRecord, PhiDictionary, parse_phi_dictionary
from .errors import ConfigError, ExhaustedRetries, ParseError, SchemaError, TransportError
from .prompts import ChatRequest, build_task_prompt
from .transports import EndpointConfig, Transport, build_transport

# Audit trail carries hosts and sizes only — note text must never reach logs.
audit_log = logging.getLogger("lppa.audit")


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 3
    backoff_base: float = 0.5
    parse_retry: bool = True

    def __post_init__(self) -> None:
        if self.max_attempts < 1:
            raise ConfigError("max_attempts must be >= 1")
        if self.backoff_base < 0:
            raise ConfigError("backoff_base must be >= 0")

    def backoff(self, attempt: int) -> float:
        """Delay before retrying after failed attempt n (1-based); doubles each time."""
        if attempt < 1:
            raise ValueError("attempt is 1-based")
        return self.backoff_base * (2 ** (attempt - 1))


@dataclass
class AnnotationOutcome:
    note_id: str
    phi: PhiDictionary | None = None
    error: Exception | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _resolve(endpoint: EndpointConfig | Transport | str) -> Transport:
    if hasattr(endpoint, "send"):
        return endpoint  # already a transport
    return build_transport(endpoint)


def _audited_send(transport: Transport, request: ChatRequest) -> str:
    reply = transport.send(request)
    audit_log.info(
        "send host=%s request_bytes=%d reply_bytes=%d",
        getattr(transport, "host", "local"),
        len(request.system.encode("utf-8")) + len(request.user.encode("utf-8")),
        len(reply.encode("utf-8")),
    )
    return reply


def annotate(
    note: NoteRecord,
    endpoint: EndpointConfig | Transport | str,
    retry: RetryPolicy = RetryPolicy(),
) -> PhiDictionary:
    """Ask the endpoint to annotate one note; re-ask while replies won't parse."""
    transport = _resolve(endpoint)
    request = build_task_prompt(note.text)
    last_reply: str | None = None
    last_error: Exception | None = None
    for attempt in range(1, retry.max_attempts + 1):
        try:
            last_reply = _audited_send(transport, request)
        except TransportError as exc:
            last_error = exc
        else:
            try:
                return parse_phi_dictionary(last_reply)
            except (ParseError, SchemaError) as exc:
                last_error = exc
                if not retry.parse_retry:
                    break
        if attempt < retry.max_attempts:
            time.sleep(retry.backoff(attempt))
    if isinstance(last_error, TransportError):
        raise last_error
    raise ExhaustedRetries(
        f"note {note.id}: no parseable reply in {retry.max_attempts} attempts"
        f" ({last_error})",
        last_reply=last_reply,
    )


def annotate_corpus(
    notes: list[NoteRecord],
    endpoint: EndpointConfig | Transport | str,
    retry: RetryPolicy = RetryPolicy(),
    parallelism: int = 1,
) -> list[AnnotationOutcome]:
    """Annotate a batch; ≤ parallelism in flight, results in input order."""
    if parallelism < 1:
        raise ConfigError("parallelism must be >= 1")
    transport = _resolve(endpoint)

    def one(note: NoteRecord) -> AnnotationOutcome:
        try:
            return AnnotationOutcome(note.id, phi=annotate(note, transport, retry))
        except (TransportError, ExhaustedRetries) as exc:
            return AnnotationOutcome(note.id, error=exc)

    with ThreadPoolExecutor(max_workers=parallelism) as pool:
        return list(pool.map(one, notes))
