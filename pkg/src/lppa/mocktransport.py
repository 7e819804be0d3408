"""Offline template transport: a deterministic stand-in for a chat endpoint.

Routes each request by its content and produces replies in the documented
formats — SPI/AEG generation replies carry a note plus its PHI dictionary,
annotation requests are answered by the bundled rule tagger. Replies are a
pure function of (transport seed, per-request seed, request text), which is
what makes seeded pipeline runs byte-reproducible.
"""

from __future__ import annotations

import ast
import hashlib
import random
from datetime import datetime
from importlib import resources

from .entities import PhiDictionary, serialize_phi_dictionary
from .errors import TransportError
from .prompts import ChatRequest, SPI_SECTION_HEADERS
from .ruletag import default_ruleset, tag_note
from .synth import TIME_FORMAT, default_pools

_MONTHS = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)
_PORTAL_DOMAINS = ("carepoint-health.org", "rivervalleymed.net", "unityclinic.com")
_COMPLAINTS = (
    "chest pain", "shortness of breath", "syncope", "abdominal pain",
    "fall from standing", "altered mental status", "fever and chills",
    "left-sided weakness", "palpitations", "intractable back pain",
)
_HISTORIES = (
    "hypertension", "type 2 diabetes", "asthma", "atrial fibrillation",
    "chronic kidney disease", "COPD", "hyperlipidemia", "migraine",
)
_PLANS = (
    "admitted for telemetry monitoring", "started on intravenous antibiotics",
    "scheduled for imaging in the morning", "given analgesia and reassessed",
    "transferred to the intensive care unit", "discharged with close follow-up",
)


def _dictionary_terms(name: str) -> tuple[str, ...]:
    path = resources.files("lppa") / "assets" / "rules" / "dicts" / name
    lines = path.read_text(encoding="utf-8").splitlines()
    return tuple(line.strip() for line in lines if line.strip())


class TemplateTransport:
    """Content-routed fake endpoint; see module docstring."""

    host = "template-mock"

    def __init__(self, seed: int = 0):
        self.seed = seed
        self._rules = default_ruleset()
        self._pools = default_pools()
        self._organizations = _dictionary_terms("organization.txt")
        self._professions = _dictionary_terms("profession.txt")

    def send(self, request: ChatRequest, *, seed: int | None = None) -> str:
        if "<INFORMATION>" in request.user:
            return self._spi_reply(request, seed)
        if "Here is the clinical note:" in request.user:
            return self._annotation_reply(request)
        if "simulated clinical notes" in request.system:
            return self._aeg_reply(request, seed)
        raise TransportError("template transport cannot route this request")

    def _rng(self, request: ChatRequest, seed: int | None) -> random.Random:
        base = f"{self.seed}|{seed}|{request.user}"
        digest = hashlib.sha256(base.encode("utf-8")).digest()
        return random.Random(int.from_bytes(digest[:8], "big"))

    # -- annotation ---------------------------------------------------------

    def _annotation_reply(self, request: ChatRequest) -> str:
        note = request.user.split("Here is the clinical note:\n", 1)[1]
        return serialize_phi_dictionary(tag_note(note, self._rules))

    # -- SPI generation -----------------------------------------------------

    def _spi_reply(self, request: ChatRequest, seed: int | None) -> str:
        info = self._parse_information(request.user)
        patient = info.get("patient", {})
        try:
            name = patient["name"]
            phone = patient["phone"]
            address = patient["address"]
        except KeyError as exc:
            raise TransportError(f"information block lacks identity field {exc}")
        rng = self._rng(request, seed)
        first = name.split()[0]
        last = name.split()[-1]
        city = address.split(", ")[1] if address.count(", ") >= 2 else ""
        zip5 = address.rsplit(" ", 1)[-1][:5]
        age = patient.get("age")
        gender_word = {"male": "male", "female": "female"}.get(
            patient.get("gender"), "patient"
        )
        admit = patient.get("hospitaladmittime", "")
        discharge = patient.get("hospitaldischargetime", "")
        diagnosis = info.get("diagnosis", {}).get("diagnosisname", "an acute illness")
        allergy = info.get("allergy", {}).get("allergyname", "")
        lab_name = info.get("lab", {}).get("labname", "")
        lab_result = info.get("lab", {}).get("labresult", "")
        lab_time = info.get("lab", {}).get("labresulttime", "")
        drug = info.get("medication", {}).get("drugname", "")
        dosage = info.get("medication", {}).get("dosage", "")
        route = info.get("medication", {}).get("routeadmin", "")
        treatment = info.get("treatment", {}).get("treatmentname", "")
        uniquepid = patient.get("uniquepid", "")

        attending = rng.choice(self._pools.last)
        organization = rng.choice(self._organizations)
        profession = rng.choice(self._professions)
        email = f"{first}.{last}{rng.randrange(10, 100)}@{rng.choice(self._pools.email_domains)}".lower()
        username = f"{first[0]}{last}{rng.randrange(10, 100)}".lower()
        url = (
            f"https://portal.{rng.choice(_PORTAL_DOMAINS)}/visit/"
            f"{rng.randrange(1000, 10000)}"
        )

        staged: dict[str, list[str]] = {}

        def claim(entity_type: str, mention: str) -> None:
            staged.setdefault(entity_type, []).append(mention)

        sentences = [f"Admission Note - {organization}."]
        claim("ORGANIZATION", organization)
        if age is not None:
            sentences.append(
                f"{name} is a {age}-year-old {gender_word} admitted on {admit}"
                f" with {diagnosis}."
            )
            claim("AGE", str(age))
        else:
            sentences.append(f"{name} was admitted on {admit} with {diagnosis}.")
        claim("PERSON", name)
        if admit:
            claim("DATE_TIME", admit)
        sentences.append(f"The patient works as a {profession} and resides at {address}.")
        claim("PROFESSION", profession)
        claim("LOCATION", address)
        if city:
            claim("LOCATION", city)
        claim("ZIP", zip5)
        sentences.append(f"Contact number: {phone}; patient email on file: {email}.")
        claim("PHONE_NUMBER", phone)
        claim("EMAIL", email)
        if allergy:
            sentences.append(f"Allergies: {allergy}.")
        if lab_name:
            sentences.append(f"{lab_name} resulted at {lab_result} on {lab_time}.")
            if lab_time:
                claim("DATE_TIME", lab_time)
        if treatment or drug:
            sentences.append(
                f"Treatment included {treatment}, and {drug} {dosage} was"
                f" administered {route}."
            )
        sentences.append(
            f"Care coordinated by Dr. {attending}; portal account: {username}"
            f" (see {url})."
        )
        claim("PERSON", attending)
        claim("USERNAME", username)
        claim("URL", url)
        if rng.random() < 0.2 and admit:
            follow_up = datetime.strptime(admit, TIME_FORMAT)
            spoken = f"{follow_up.day} {_MONTHS[follow_up.month - 1]} {follow_up.year}"
            sentences.append(
                f"Follow-up scheduled for {spoken} at the {city} clinic."
                if city
                else f"Follow-up scheduled for {spoken}."
            )
            claim("DATE_TIME", spoken)
        if uniquepid:
            sentences.append(f"Record ID {uniquepid}.")
            claim("ID", uniquepid)
        if discharge:
            sentences.append(f"Discharged on {discharge}.")
            claim("DATE_TIME", discharge)
        note = " ".join(sentences)
        phi = PhiDictionary(staged)
        return f"Clinical note: {note}\nPHI: {serialize_phi_dictionary(phi)}"

    @staticmethod
    def _parse_information(user: str) -> dict:
        head, marker, tail = user.partition("<INFORMATION>")
        block, end_marker, _ = tail.partition("<END OF INFORMATION>")
        if not marker or not end_marker:
            raise TransportError("information block markers missing")
        data: dict[str, dict] = {}
        current: str | None = None
        for line in block.strip().splitlines():
            if line == "PATIENT INFORMATION:":
                current = "patient"
            elif line in SPI_SECTION_HEADERS:
                current = line.lower()
            elif current is not None and line.startswith("{"):
                try:
                    data[current] = ast.literal_eval(line)
                except (ValueError, SyntaxError) as exc:
                    raise TransportError(f"bad {current} block: {exc}") from None
                current = None
        if "patient" not in data:
            raise TransportError("information block lacks PATIENT INFORMATION")
        return data

    # -- AEG generation -----------------------------------------------------

    def _aeg_reply(self, request: ChatRequest, seed: int | None) -> str:
        rng = self._rng(request, seed)
        pools = self._pools
        gender = rng.choice(("female", "male"))
        first_pool = pools.female_first if gender == "female" else pools.male_first
        name = f"{rng.choice(first_pool)} {rng.choice(pools.last)}"
        honorific = "Ms." if gender == "female" else "Mr."
        titled = f"{honorific} {rng.choice(pools.last)}"
        attending = rng.choice(pools.last)
        age = rng.randrange(18, 95)
        city, state = rng.choice(pools.cities)
        year = rng.randrange(2099, 2106)
        month = rng.randrange(1, 13)
        day = rng.randrange(1, 29)
        if rng.random() < 0.5:
            date = f"{_MONTHS[month - 1]} {day}, {year}"
        else:
            date = f"{month}/{day}/{year}"
        complaint = rng.choice(_COMPLAINTS)
        history = rng.choice(_HISTORIES)
        plan = rng.choice(_PLANS)
        profession = rng.choice(self._professions)

        staged: dict[str, list[str]] = {}

        def claim(entity_type: str, mention: str) -> None:
            staged.setdefault(entity_type, []).append(mention)

        sentences = [
            f"Chief Complaint: {complaint.capitalize()}.",
            f"{name} is a {age}-year-old {gender} with a history of {history}"
            f" who presented on {date} after developing {complaint}.",
        ]
        claim("PERSON", name)
        claim("AGE", str(age))
        claim("DATE_TIME", date)
        if rng.random() < 0.5:
            sentences.append(f"The patient, a {profession} from {city}, {state},"
                             f" was {plan}.")
            claim("PROFESSION", profession)
        else:
            sentences.append(f"The patient lives in {city}, {state} and was {plan}.")
        claim("LOCATION", city)
        if rng.random() < 0.4:
            phone = "{}{}{}-{}{}{}-{}{}{}{}".format(*[rng.randrange(10) for _ in range(10)])
            sentences.append(f"Family may be reached at {phone}.")
            claim("PHONE_NUMBER", phone)
        sentences.append(f"{titled} was evaluated by Dr. {attending} overnight.")
        claim("PERSON", titled)
        claim("PERSON", attending)
        note = " ".join(sentences)
        phi = PhiDictionary(staged)
        return f'Clinical Note: "{note}", PHI: {serialize_phi_dictionary(phi)}'
