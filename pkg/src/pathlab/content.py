"""Lesson books with embedded multiple-choice quizzes.

A book is pages of plain text plus an optional quiz; passing the quiz
opens the gate in front of any challenge that references the book.
Small quizzes (up to 3 items) demand a perfect score by default, larger
ones 75%, and each book may override its own threshold.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

from .errors import ArgumentError, ParseError

SMALL_QUIZ_MAX = 3
SMALL_QUIZ_THRESHOLD = 1.0
LARGE_QUIZ_THRESHOLD = 0.75


@dataclass(frozen=True)
class QuizItem:
    question: str
    options: tuple[str, ...]
    correct: int
    explanation: str = ""

    def __post_init__(self):
        if not 2 <= len(self.options) <= 6:
            raise ArgumentError("a quiz item needs between 2 and 6 options")
        if any(not opt for opt in self.options):
            raise ArgumentError("quiz options must be non-empty")
        if not 0 <= self.correct < len(self.options):
            raise ArgumentError("correct option index out of range")


@dataclass(frozen=True)
class Book:
    id: str
    title: str
    pages: tuple[str, ...]
    quiz: tuple[QuizItem, ...] = ()
    threshold: float | None = None

    def __post_init__(self):
        if not self.pages:
            raise ArgumentError("a book needs at least one page")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ArgumentError("threshold must be within [0, 1]")

    @property
    def pass_threshold(self) -> float:
        if self.threshold is not None:
            return self.threshold
        if len(self.quiz) <= SMALL_QUIZ_MAX:
            return SMALL_QUIZ_THRESHOLD
        return LARGE_QUIZ_THRESHOLD


@dataclass(frozen=True)
class GradeResult:
    score: float
    per_item: tuple[bool, ...]
    gate_passed: bool


def grade_quiz(book: Book, answers: list[int]) -> GradeResult:
    """Grade one submission. An empty quiz passes vacuously."""
    if len(answers) != len(book.quiz):
        raise ArgumentError(
            f"expected {len(book.quiz)} answers, got {len(answers)}"
        )
    if not book.quiz:
        return GradeResult(1.0, (), True)
    per_item = tuple(
        answer == item.correct for item, answer in zip(book.quiz, answers)
    )
    score = sum(per_item) / len(per_item)
    return GradeResult(score, per_item, score >= book.pass_threshold)


# ---------------------------------------------------------------------------
# Book documents (see docs/formats.md):
#
#   id: dijkstra-basics
#   title: Weighted Shortest Paths
#   threshold: 0.75            (optional)
#
#   [page]
#   free text...
#
#   [quiz]
#   question: ...
#   option: ...
#   option: ...
#   correct: 1                 (0-based index)
#   explanation: ...           (optional)
# ---------------------------------------------------------------------------


def load_book(text: str) -> Book:
    meta: dict[str, str] = {}
    pages: list[str] = []
    quiz: list[QuizItem] = []
    section: str | None = None  # None = front matter
    page_lines: list[str] = []
    item: dict[str, object] = {}

    def flush_page(line_no: int):
        body = "\n".join(page_lines).strip()
        if not body:
            raise ParseError("empty [page] section", line_no)
        pages.append(body)
        page_lines.clear()

    def flush_quiz(line_no: int):
        missing = [k for k in ("question", "options", "correct") if k not in item]
        if missing:
            raise ParseError(f"[quiz] section missing {missing[0]}", line_no)
        try:
            quiz.append(
                QuizItem(
                    str(item["question"]),
                    tuple(item["options"]),  # type: ignore[arg-type]
                    int(item["correct"]),  # type: ignore[arg-type]
                    str(item.get("explanation", "")),
                )
            )
        except ArgumentError as exc:
            raise ParseError(str(exc), line_no) from exc
        item.clear()

    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip()
        stripped = line.strip()
        if stripped in ("[page]", "[quiz]"):
            if section == "page":
                flush_page(line_no)
            elif section == "quiz":
                flush_quiz(line_no)
            section = stripped[1:-1]
            continue
        if section is None:
            if not stripped:
                continue
            if ":" not in stripped:
                raise ParseError("front matter lines must be 'key: value'", line_no)
            key, value = (part.strip() for part in stripped.split(":", 1))
            meta[key] = value
        elif section == "page":
            page_lines.append(line)
        else:
            if not stripped:
                continue
            if ":" not in stripped:
                raise ParseError("quiz lines must be 'key: value'", line_no)
            key, value = (part.strip() for part in stripped.split(":", 1))
            if key == "question":
                item["question"] = value
            elif key == "option":
                item.setdefault("options", []).append(value)  # type: ignore[union-attr]
            elif key == "correct":
                try:
                    item["correct"] = int(value)
                except ValueError:
                    raise ParseError("correct must be an integer index", line_no) from None
            elif key == "explanation":
                item["explanation"] = value
            else:
                raise ParseError(f"unknown quiz field {key!r}", line_no)

    last_line = len(text.splitlines())
    if section == "page":
        flush_page(last_line)
    elif section == "quiz":
        flush_quiz(last_line)

    if "id" not in meta or "title" not in meta:
        raise ParseError("book front matter needs 'id' and 'title'")
    threshold = None
    if "threshold" in meta:
        try:
            threshold = float(meta["threshold"])
        except ValueError:
            raise ParseError("threshold must be a number") from None
    try:
        return Book(meta["id"], meta["title"], tuple(pages), tuple(quiz), threshold)
    except ArgumentError as exc:
        raise ParseError(str(exc)) from exc


def load_books(directory: str | Path) -> dict[str, Book]:
    books: dict[str, Book] = {}
    for path in sorted(Path(directory).glob("*.book")):
        book = load_book(path.read_text())
        if book.id in books:
            raise ParseError(f"duplicate book id {book.id!r} in {path.name}")
        books[book.id] = book
    return books
