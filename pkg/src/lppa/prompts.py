"""Chat prompt assembly for annotation and synthetic-note generation.

Every template below is frozen: tests compare builder output byte-for-byte
against the golden assets shipped under assets/golden/. Do not reflow, reword,
or "fix" the template text — downstream fine-tuned models are sensitive to the
exact bytes, including the grammatical quirks.
"""

from __future__ import annotations

from dataclasses import dataclass

ANNOTATION_SYSTEM = "You are an experienced doctor who helps with PHI annotation."

ANNOTATION_USER_PREFIX = (
    "You are helping with Personal Health Information(PHI) Annotation. "
    "You will receive a piece of clinical note, please follow the instructions below:\n"
    '1. Identify and extract the following entity types: ["PERSON", "LOCATION", '
    '"ORGANIZATION", "AGE", "PHONE_NUMBER", "EMAIL", "DATE_TIME", "ZIP", '
    '"PROFESSION", "USERNAME", "ID", "URL"]\n'
    "2. Ensure that each identified entity is categorized under the correct entity "
    "type from the list above.\n"
    "3. Extract all possible instances of the specified entity types from the "
    "clinical note. Even if there is some uncertainty, it's important to include "
    "any entity that could potentially belong to one of the listed categories.\n"
    "4. Make sure that the entities identified and extracted are as accurate as "
    "possible, but focus on ensuring no relevant entities are missing.\n"
    "5. Your output must be a JSON dictionary where the keys are the specified "
    "entity types, and the values are lists of the corresponding identified "
    "entities. No explanation needed.\n"
    "Here is the clinical note:\n"
)

AEG_SYSTEM = (
    "Act as an experienced doctor. Your goal is to generate simulated clinical "
    "notes. A clinical note contains Protected Health Information (PHI), which "
    "includes the following entity types: 'PERSON', 'LOCATION', 'ORGANIZATION', "
    "'AGE', 'PHONE_NUMBER', 'EMAIL', 'DATE_TIME', 'ZIP', 'PROFESSION', "
    "'USERNAME', 'ID', 'URL'.\n"
    "You are asked to generate simulated clinical notes with PHI information and "
    "then extract all PHI entities within the simulated clinical notes and store "
    "them in a dictionary.\n"
    "The expected output format is: Clinical Note: Simulated_Note, PHI: Note_PHI, "
    "where Simulated_Note is the simulated note, and Note_PHI is a dictionary "
    "containing all PHI elements within the corresponding simulated note.\n"
    "Dictionary Note_PHI should only include the following keys: 'PERSON', "
    "'LOCATION', 'ORGANIZATION', 'AGE', 'PHONE_NUMBER', 'EMAIL', 'DATE_TIME', "
    "'ZIP', 'PROFESSION', 'USERNAME', 'ID', 'URL'.\n"
    "For the 'PERSON' entity type, there are two special cases: 1. When you "
    "generate 'Dr. John', you should only extract 'John' as a PHI element; 2. "
    "When you generate 'Mr. John', you should take 'Mr. John' as a PHI element.\n"
    "Here are some sample answers I want:\n"
    'Clinical Note: "Chief Complaint: Cardiac Arrest...", PHI: {"PERSON":["John '
    'Doe", "Swift"], "ORGANIZATION":["hospital"], "AGE":["24"], '
    '"PHONE_NUMBER":["999-9999-999"]}\n'
    'Clinical Note: "Chief Complaint: Fall...", PHI: {"PERSON":["Jimmy Chen"], '
    '"AGE":["30"], "DATE_TIME":["3/22/2023"]}'
)

AEG_USER = (
    "Please generate one simulated clinical notes along with a list which "
    "contains all Protected Health Information (PHI) entities within the notes."
)

SPI_SYSTEM = "You are an assistant who helps the doctor write clinical notes."

SPI_USER_HEAD = (
    "You are an assistant who helps the doctor write and annotate clinical "
    "notes. You should follow the following two steps:\n"
    "1. Please write a clinical note. THE NOTE SHOULD BE AT ABOUT 800 WORDS. "
    "Here is some information you can refer to. You MUST use the 'name', "
    "'phone', and 'address' field in PATIENT INFORMATION\n"
    "<INFORMATION>\n"
)

SPI_USER_MID = (
    "\n<END OF INFORMATION>\n"
    "\n"
    "Here is a note as an example:\n"
    "<EXAMPLE>\n"
)

SPI_USER_TAIL = (
    "\n<END OF EXAMPLE>\n"
    "\n"
    "Note that your output content should be different from the example. Please "
    "add the patient's email (The email domain name must be a real one.) and "
    "relationship in the clinical note. You can make up the doctor's name, "
    "date, patient's email and relationship. You must make up necessary "
    "information if they are used.\n"
    "\n"
    "2. After generating the note, extract all PHI entities within the note and "
    "store them in a JSON. PHI entity types include: 'PERSON', 'LOCATION', "
    "'ORGANIZATION', 'AGE', 'PHONE_NUMBER', 'EMAIL', 'DATE_TIME', 'ZIP', "
    "'PROFESSION', 'USERNAME', 'ID', 'URL'. For 'PERSON' entity type, there are "
    "two special cases:\n"
    "1. When you generate 'Dr.(Name)', you should only extract '(Name)' as a "
    "PHI element;\n"
    "2. When you generate 'Mr./Ms./Mrs.(Name)', you should take "
    "'Mr./Ms./Mrs.(Name)' as a PHI element.\n"
    "\n"
    "Here is an example of PHI:\n"
    '{ "PERSON": ["Emily Turner", "Smith"],\n'
    '"AGE": ["28"],\n'
    '"ORGANIZATION": ["Midtown Medical Center"],\n'
    '"DATE_TIME": ["September 15th, 2023, at approximately \'9:45 PM\'"],\n'
    '"LOCATION": ["Central Park, New York"],\n'
    '"PHONE_NUMBER": ["555-123-4567"]\n'
    "}\n"
    "(End of Example)\n"
    "\n"
    "Your answer format should be like this:\n"
    "Clinical note: (Your clinical note)\n"
    "PHI: (Your PHI, in JSON format)"
)

SPI_SECTION_HEADERS = ("ALLERGY", "DIAGNOSIS", "LAB", "MEDICATION", "TREATMENT")


@dataclass(frozen=True)
class ChatRequest:
    """One chat-completion call: a system message plus a user message.

    model is empty by default, meaning "use the endpoint's configured model".
    """

    system: str
    user: str
    model: str = ""
    temperature: float = 0.0
    max_output_tokens: int = 1024

    def __post_init__(self) -> None:
        if not self.system or not self.user:
            raise ValueError("system and user messages must be non-empty")
        if self.temperature < 0:
            raise ValueError("temperature must be >= 0")


def build_task_prompt(note_text: str) -> ChatRequest:
    """Annotation prompt: fixed instructions with the note appended at the end."""
    if not note_text:
        raise ValueError("note_text must be non-empty")
    return ChatRequest(
        system=ANNOTATION_SYSTEM,
        user=ANNOTATION_USER_PREFIX + note_text,
        temperature=0.0,
        max_output_tokens=1024,
    )


def build_aeg_prompt(n_requested: int = 1) -> ChatRequest:
    """Example-guided generation prompt.

    The template requests exactly one note per call; callers wanting N notes
    issue N calls. n_requested is validated so that a misuse fails loudly
    instead of silently generating fewer notes than expected.
    """
    if n_requested != 1:
        raise ValueError("the generation prompt requests exactly one note per call")
    return ChatRequest(
        system=AEG_SYSTEM,
        user=AEG_USER,
        temperature=1.0,
        max_output_tokens=2048,
    )


def render_information_block(record, identity) -> str:
    """Render the structured-record information block for the insertion prompt.

    The simulated identity is spliced into the patient map (name, phone,
    address appended last). Blocks are rendered as Python-style dict literals;
    the exact text is part of the frozen prompt format.
    """
    patient = dict(record.patient)
    patient["name"] = identity.name
    patient["phone"] = identity.phone
    patient["address"] = identity.address
    lines = ["PATIENT INFORMATION:", repr(patient)]
    sections = (record.allergy, record.diagnosis, record.lab, record.medication, record.treatment)
    for header, section in zip(SPI_SECTION_HEADERS, sections):
        lines.append(header)
        lines.append(repr(dict(section)))
    return "\n".join(lines)


def build_spi_prompt(record, identity, exemplar: str) -> ChatRequest:
    """PHI-insertion generation prompt built around one structured record.

    record/identity are a StructuredRecord and SimulatedIdentity (duck-typed
    here to keep this module free of imports from the generation pipeline);
    exemplar is the anonymized note shown inside the <EXAMPLE> block.
    """
    if not exemplar or not exemplar.strip():
        raise ValueError("exemplar must be non-empty")
    user = (
        SPI_USER_HEAD
        + render_information_block(record, identity)
        + SPI_USER_MID
        + exemplar
        + SPI_USER_TAIL
    )
    return ChatRequest(
        system=SPI_SYSTEM,
        user=user,
        temperature=1.0,
        max_output_tokens=2048,
    )
