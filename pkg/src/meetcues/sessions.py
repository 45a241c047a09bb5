"""Meeting lifecycle primitives: join codes, anonymization, bearer tokens.

Attendee identity is a keyed hash of the meeting salt and the normalized
email; the email itself is discarded after derivation (the notifier keeps
its own address book, separate from all event data).
"""

from __future__ import annotations

import hmac
import hashlib
import random
import secrets
from dataclasses import dataclass
from typing import Any, Callable

from .domain import (
    AttendeeId,
    DomainValidationError,
    HASHTAG_ALPHABET,
    HASHTAG_LENGTH,
    MeetingSession,
    TITLE_MAX_CHARS,
)

# Source of randomness: n -> n fresh bytes. Production uses the secrets
# module; simulation injects a seeded PRNG so replays are reproducible.
RandBytes = Callable[[int], bytes]

HASHTAG_MAX_RETRIES = 16


def secure_rand() -> RandBytes:
    return secrets.token_bytes


def seeded_rand(seed: int) -> RandBytes:
    return random.Random(seed).randbytes


def derive_attendee_id(salt: bytes, email: str) -> AttendeeId:
    """First 128 bits of HMAC-SHA256(salt, lowercase(trim(email))).

    Deterministic per (salt, email), unrelated across salts, and not
    invertible back to the email without the salt.
    """
    normalized = email.strip().lower().encode("utf-8")
    digest = hmac.new(salt, normalized, hashlib.sha256).digest()
    return AttendeeId.from_bytes(digest[:16])


def validate_email(email: str) -> str:
    """Syntactic check only: one '@' with non-empty local and domain parts."""
    trimmed = email.strip()
    if trimmed.count("@") != 1:
        raise DomainValidationError("email must contain exactly one '@'")
    local, domain = trimmed.split("@")
    if not local or not domain:
        raise DomainValidationError("email must have non-empty local and domain parts")
    return trimmed


def new_hashtag(rand: RandBytes) -> str:
    # Alphabet has 32 symbols, so a byte mod 32 is unbiased.
    raw = rand(HASHTAG_LENGTH)
    return "".join(HASHTAG_ALPHABET[b % len(HASHTAG_ALPHABET)] for b in raw)


def new_meeting_id(rand: RandBytes) -> str:
    return rand(16).hex()


def new_token_value(rand: RandBytes) -> str:
    return rand(16).hex()


def new_comment_id(rand: RandBytes) -> str:
    return rand(8).hex()


@dataclass(frozen=True)
class SessionToken:
    """Bearer credential binding one principal to one meeting."""

    token: str
    meeting_id: str
    attendee: AttendeeId
    issued_at: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "token": self.token,
            "meeting_id": self.meeting_id,
            "attendee": self.attendee.hex,
            "issued_at": self.issued_at,
        }

    @classmethod
    def from_dict(cls, d: dict[str, Any]) -> "SessionToken":
        return cls(
            token=d["token"],
            meeting_id=d["meeting_id"],
            attendee=AttendeeId(d["attendee"]),
            issued_at=d["issued_at"],
        )


def new_meeting(
    host_id: str,
    title: str,
    recording_enabled: bool,
    rand: RandBytes,
    taken_hashtags: Callable[[str], bool],
) -> MeetingSession:
    """Build a fresh session with a unique hashtag and fresh salt."""
    if not host_id:
        raise DomainValidationError("host_id must be non-empty")
    if not title or len(title) > TITLE_MAX_CHARS:
        raise DomainValidationError(f"title must be 1..{TITLE_MAX_CHARS} chars")
    for _ in range(HASHTAG_MAX_RETRIES):
        hashtag = new_hashtag(rand)
        if not taken_hashtags(hashtag):
            return MeetingSession(
                meeting_id=new_meeting_id(rand),
                hashtag=hashtag,
                title=title,
                host_id=host_id,
                recording_enabled=recording_enabled,
                salt=rand(16),
            )
    raise RuntimeError(f"could not find a free hashtag in {HASHTAG_MAX_RETRIES} tries")


def host_principal(salt: bytes, host_id: str) -> AttendeeId:
    """The lifecycle-control principal; never joins, never appears in the cloud."""
    return derive_attendee_id(salt, f"host:{host_id}")
