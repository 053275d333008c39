"""Dataset loading and conversion.

Three external formats are understood (word-problem JSONL with ``####``
gold markers, the body/question JSON array style, and choice-question
JSONL with lettered options) plus one canonical JSONL form that every
loader can be converted into. Loaders are strict: unparseable records
and missing gold answers are errors, not silently dropped rows.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path
from typing import List, Optional, Tuple, Union

from .core import Answer, Question, float_to_rational, normalize_answer

FORMATS = ("gsm8k_jsonl", "svamp_json", "aqua_jsonl", "canonical_jsonl")


class DatasetError(Exception):
    pass


class ParseError(DatasetError):
    def __init__(self, path, line_no: int, reason: str):
        super().__init__("%s:%d: %s" % (path, line_no, reason))
        self.line_no = line_no


class MissingGold(DatasetError):
    def __init__(self, qid: str, reason: str = "no gold answer"):
        super().__init__("%s: %s" % (qid, reason))
        self.qid = qid


def _read_jsonl(path) -> List[Tuple[int, dict]]:
    records = []
    with open(path, encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ParseError(path, line_no, "bad JSON: %s" % exc) from None
            if not isinstance(record, dict):
                raise ParseError(path, line_no, "record is not an object")
            records.append((line_no, record))
    return records


def load_gsm8k(path) -> List[Question]:
    """JSONL with free-text ``answer`` whose last ``####`` marks the gold."""
    questions = []
    for index, (line_no, record) in enumerate(_read_jsonl(path)):
        qid = str(record.get("id", "gsm8k-%04d" % index))
        try:
            text = record["question"]
            answer_text = record["answer"]
        except KeyError as exc:
            raise ParseError(path, line_no, "missing field %s" % exc) from None
        if "####" not in answer_text:
            raise MissingGold(qid, "no #### marker in answer")
        gold_token = answer_text.rsplit("####", 1)[1].strip()
        gold = normalize_answer(gold_token, "numeric")
        if gold.is_none:
            raise MissingGold(qid, "unparseable gold %r" % gold_token)
        questions.append(Question(qid, text.strip(), gold, dataset="gsm8k"))
    return questions


def load_svamp(path) -> List[Question]:
    """JSON array of records with Body, Question and a numeric Answer."""
    with open(path, encoding="utf-8") as handle:
        try:
            payload = json.load(handle)
        except json.JSONDecodeError as exc:
            raise ParseError(path, exc.lineno, "bad JSON: %s" % exc) from None
    if not isinstance(payload, list):
        raise ParseError(path, 1, "expected a JSON array")
    questions = []
    for index, record in enumerate(payload):
        qid = str(record.get("ID", "svamp-%04d" % index))
        body = str(record.get("Body", "")).strip()
        tail = str(record.get("Question", "")).strip()
        text = (body + " " + tail).strip()
        if not text:
            raise MissingGold(qid, "empty question")
        raw = record.get("Answer")
        gold = normalize_answer(raw, "numeric")
        if gold.is_none:
            raise MissingGold(qid, "unparseable gold %r" % (raw,))
        questions.append(Question(qid, text, gold, dataset="svamp"))
    return questions


def _parse_option(raw: str) -> Tuple[str, str]:
    cleaned = raw.strip()
    label = cleaned[:1].upper()
    rest = cleaned[1:].lstrip(" )").strip()
    return label, rest


def load_aqua(path) -> List[Question]:
    """Choice-question JSONL with options like ``A)21`` and a correct label."""
    questions = []
    for index, (line_no, record) in enumerate(_read_jsonl(path)):
        qid = str(record.get("id", "aqua-%04d" % index))
        try:
            text = record["question"].strip()
            raw_options = record["options"]
            correct = record["correct"]
        except KeyError as exc:
            raise ParseError(path, line_no, "missing field %s" % exc) from None
        options = tuple(_parse_option(raw) for raw in raw_options)
        gold = normalize_answer(correct, "choice")
        if gold.is_none:
            raise MissingGold(qid, "unparseable gold label %r" % (correct,))
        rendered = " ".join("(%s) %s" % (label, body) for label, body in options)
        questions.append(
            Question(
                qid,
                text + "\nAnswer Choices: " + rendered,
                gold,
                dataset="aqua",
                options=options,
            )
        )
    return questions


# ---------------------------------------------------------------------
# Canonical form
# ---------------------------------------------------------------------

def answer_to_record(answer: Answer) -> dict:
    if answer.kind == "numeric":
        value = answer.value
        text = (
            str(value.numerator)
            if value.denominator == 1
            else "%d/%d" % (value.numerator, value.denominator)
        )
        return {"type": "numeric", "value": text}
    if answer.kind == "choice":
        return {"type": "choice", "value": answer.value}
    return {"type": "none", "value": None}


def answer_from_record(record: dict) -> Answer:
    kind = record.get("type")
    if kind == "numeric":
        return Answer.numeric(Fraction(str(record["value"])))
    if kind == "choice":
        return Answer.choice(str(record["value"]))
    return Answer.none()


def question_to_record(question: Question) -> dict:
    record = {
        "id": question.id,
        "question": question.text,
        "answer": answer_to_record(question.gold),
    }
    if question.dataset:
        record["dataset"] = question.dataset
    if question.options is not None:
        record["options"] = [list(pair) for pair in question.options]
    return record


def question_from_record(record: dict) -> Question:
    options = record.get("options")
    return Question(
        id=str(record["id"]),
        text=record["question"],
        gold=answer_from_record(record["answer"]),
        dataset=record.get("dataset", ""),
        options=tuple((o[0], o[1]) for o in options) if options else None,
    )


def load_canonical(path) -> List[Question]:
    questions = []
    for line_no, record in _read_jsonl(path):
        try:
            question = question_from_record(record)
        except (KeyError, ValueError, TypeError) as exc:
            raise ParseError(path, line_no, "bad record: %s" % exc) from None
        if question.gold.is_none:
            raise MissingGold(question.id)
        questions.append(question)
    return questions


def write_canonical(questions, path) -> None:
    with open(path, "w", encoding="utf-8") as handle:
        for question in questions:
            handle.write(json.dumps(question_to_record(question), ensure_ascii=False))
            handle.write("\n")


_LOADERS = {
    "gsm8k_jsonl": load_gsm8k,
    "svamp_json": load_svamp,
    "aqua_jsonl": load_aqua,
    "canonical_jsonl": load_canonical,
}


def load_dataset(path: Union[str, Path], format: str) -> List[Question]:
    try:
        loader = _LOADERS[format]
    except KeyError:
        raise DatasetError(
            "unknown dataset format %r (expected one of %s)" % (format, ", ".join(FORMATS))
        ) from None
    return loader(path)
