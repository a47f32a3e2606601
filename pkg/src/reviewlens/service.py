"""Annotation-round service: sentence assignment, gated annotation
capture, live agreement and round export, backed by a single-file
sqlite store.  The HTTP layer is a thin wrapper over RoundStore."""

import json
import os
import random
import sqlite3
import threading
from dataclasses import dataclass

from .agreement import agreement_stats
from .categories import CATEGORIES, Category
from .corpus import AnnotationRecord, SamplingSpec, SamplingMode, Sentence, TextBox, sample_round
from .errors import (
    DuplicateSubmission,
    GatingViolation,
    MalformedRecord,
    NotAssigned,
    NotInPanel,
    PanelTooSmall,
    RoundClosed,
    UnknownRound,
)

DB_PATH_ENV = "REVIEWLENS_DB_PATH"
BIND_ADDR_ENV = "REVIEWLENS_BIND_ADDR"
ANNOTATORS_PER_SENTENCE = 3

_SCHEMA = """
CREATE TABLE IF NOT EXISTS rounds (
    round_id TEXT PRIMARY KEY,
    spec TEXT NOT NULL,
    panel TEXT NOT NULL,
    status TEXT NOT NULL DEFAULT 'Open'
);
CREATE TABLE IF NOT EXISTS round_sentences (
    round_id TEXT NOT NULL,
    sentence_id TEXT NOT NULL,
    review_id TEXT NOT NULL,
    position INTEGER NOT NULL,
    text TEXT NOT NULL,
    text_box INTEGER NOT NULL,
    PRIMARY KEY (round_id, sentence_id)
);
CREATE TABLE IF NOT EXISTS assignments (
    round_id TEXT NOT NULL,
    sentence_id TEXT NOT NULL,
    annotator_id TEXT NOT NULL,
    queue_order INTEGER NOT NULL,
    PRIMARY KEY (round_id, sentence_id, annotator_id)
);
CREATE TABLE IF NOT EXISTS annotations (
    round_id TEXT NOT NULL,
    sentence_id TEXT NOT NULL,
    annotator_id TEXT NOT NULL,
    labels TEXT NOT NULL,
    rationale_context INTEGER,
    PRIMARY KEY (round_id, sentence_id, annotator_id)
);
"""


@dataclass(frozen=True)
class RoundInfo:
    round_id: str
    panel: tuple
    status: str
    n_sentences: int

    def to_json(self):
        return {
            "round_id": self.round_id,
            "panel": list(self.panel),
            "status": self.status,
            "n_sentences": self.n_sentences,
        }


class RoundStore:
    """All round state in one sqlite file; duplicate submissions are
    rejected atomically by the annotations primary key."""

    def __init__(self, db_path=None):
        self.db_path = db_path or os.environ.get(DB_PATH_ENV, ":memory:")
        self._conn = sqlite3.connect(self.db_path, check_same_thread=False)
        self._conn.executescript(_SCHEMA)
        self._conn.commit()
        self._write_lock = threading.Lock()

    def close(self):
        self._conn.close()

    # --- round lifecycle ----------------------------------------------

    def create_round(self, round_id, sentences, spec, panel):
        panel = list(dict.fromkeys(panel))
        if len(panel) < ANNOTATORS_PER_SENTENCE:
            raise PanelTooSmall(
                f"panel of {len(panel)}, need {ANNOTATORS_PER_SENTENCE}"
            )
        sampled = sample_round(sentences, spec)
        # balanced assignment: each sentence goes to the 3 least-loaded
        # panelists, ties broken by a seeded shuffle of the panel
        rng = random.Random(spec.seed)
        order = list(panel)
        rng.shuffle(order)
        load = {a: 0 for a in panel}
        assignment = []
        for sentence in sampled:
            chosen = sorted(order, key=lambda a: (load[a], order.index(a)))
            chosen = chosen[:ANNOTATORS_PER_SENTENCE]
            for annotator in chosen:
                load[annotator] += 1
                assignment.append((sentence.sentence_id, annotator))
        with self._write_lock, self._conn:
            self._conn.execute(
                "INSERT INTO rounds (round_id, spec, panel) VALUES (?, ?, ?)",
                (round_id,
                 json.dumps({"mode": spec.mode.value, "n_total": spec.n_total,
                             "n_per_box": spec.n_per_box, "seed": spec.seed}),
                 json.dumps(panel)),
            )
            self._conn.executemany(
                "INSERT INTO round_sentences VALUES (?, ?, ?, ?, ?, ?)",
                [(round_id, s.sentence_id, s.review_id, s.position, s.text,
                  s.text_box.value) for s in sampled],
            )
            queue_order = {a: 0 for a in panel}
            rows = []
            for sentence_id, annotator in assignment:
                rows.append((round_id, sentence_id, annotator,
                             queue_order[annotator]))
                queue_order[annotator] += 1
            self._conn.executemany(
                "INSERT INTO assignments VALUES (?, ?, ?, ?)", rows
            )
        return self.round_info(round_id)

    def _round_row(self, round_id):
        row = self._conn.execute(
            "SELECT round_id, panel, status FROM rounds WHERE round_id = ?",
            (round_id,),
        ).fetchone()
        if row is None:
            raise UnknownRound(round_id)
        return row

    def round_info(self, round_id):
        row = self._round_row(round_id)
        n = self._conn.execute(
            "SELECT COUNT(*) FROM round_sentences WHERE round_id = ?",
            (round_id,),
        ).fetchone()[0]
        return RoundInfo(
            round_id=row[0], panel=tuple(json.loads(row[1])), status=row[2],
            n_sentences=n,
        )

    def close_round(self, round_id):
        self._round_row(round_id)
        with self._write_lock, self._conn:
            self._conn.execute(
                "UPDATE rounds SET status = 'Closed' WHERE round_id = ?",
                (round_id,),
            )

    def progress(self, round_id):
        info = self.round_info(round_id)
        assigned = self._conn.execute(
            "SELECT COUNT(*) FROM assignments WHERE round_id = ?",
            (round_id,),
        ).fetchone()[0]
        submitted = self._conn.execute(
            "SELECT COUNT(*) FROM annotations WHERE round_id = ?",
            (round_id,),
        ).fetchone()[0]
        complete = self._conn.execute(
            "SELECT COUNT(*) FROM (SELECT sentence_id FROM annotations "
            "WHERE round_id = ? GROUP BY sentence_id "
            "HAVING COUNT(*) = ?)",
            (round_id, ANNOTATORS_PER_SENTENCE),
        ).fetchone()[0]
        return {
            **info.to_json(),
            "assigned": assigned,
            "submitted": submitted,
            "complete_sentences": complete,
        }

    # --- annotation flow ----------------------------------------------

    def next_assignments(self, round_id, annotator_id, n=20):
        info = self.round_info(round_id)
        if annotator_id not in info.panel:
            raise NotInPanel(annotator_id)
        if n <= 0:
            return []
        rows = self._conn.execute(
            "SELECT s.sentence_id, s.review_id, s.position, s.text, "
            "s.text_box FROM assignments a "
            "JOIN round_sentences s ON s.round_id = a.round_id "
            "AND s.sentence_id = a.sentence_id "
            "WHERE a.round_id = ? AND a.annotator_id = ? "
            "AND NOT EXISTS (SELECT 1 FROM annotations n "
            "  WHERE n.round_id = a.round_id "
            "  AND n.sentence_id = a.sentence_id "
            "  AND n.annotator_id = a.annotator_id) "
            "ORDER BY a.queue_order LIMIT ?",
            (round_id, annotator_id, n),
        ).fetchall()
        return [
            Sentence(sentence_id=r[0], review_id=r[1], position=r[2],
                     text=r[3], text_box=TextBox(r[4]))
            for r in rows
        ]

    def submit_annotation(self, record):
        # the whole check-then-insert sequence holds the writer lock so
        # concurrent submitters cannot interleave reads with the commit
        with self._write_lock:
            info = self.round_info(record.round_id)
            if info.status != "Open":
                raise RoundClosed(record.round_id)
            assigned = self._conn.execute(
                "SELECT 1 FROM assignments WHERE round_id = ? "
                "AND sentence_id = ? AND annotator_id = ?",
                (record.round_id, record.sentence_id, record.annotator_id),
            ).fetchone()
            if assigned is None:
                raise NotAssigned(
                    f"{record.sentence_id} not assigned to "
                    f"{record.annotator_id}"
                )
            labels = json.dumps(
                {c.value: record.labels[c] for c in CATEGORIES}
            )
            try:
                with self._conn:
                    self._conn.execute(
                        "INSERT INTO annotations VALUES (?, ?, ?, ?, ?)",
                        (record.round_id, record.sentence_id,
                         record.annotator_id, labels,
                         record.rationale_context),
                    )
            except sqlite3.IntegrityError as exc:
                raise DuplicateSubmission(
                    f"{record.sentence_id} by {record.annotator_id}"
                ) from exc

    def _records(self, round_id):
        rows = self._conn.execute(
            "SELECT sentence_id, annotator_id, labels, rationale_context "
            "FROM annotations WHERE round_id = ? "
            "ORDER BY sentence_id, annotator_id",
            (round_id,),
        ).fetchall()
        records = []
        for sid, annotator, labels, rc in rows:
            records.append(AnnotationRecord(
                sentence_id=sid,
                annotator_id=annotator,
                round_id=round_id,
                labels={Category(k): v for k, v in json.loads(labels).items()},
                rationale_context=rc,
            ))
        return records

    def round_agreement(self, round_id):
        self._round_row(round_id)
        records = self._records(round_id)
        by_sentence = {}
        for record in records:
            by_sentence.setdefault(record.sentence_id, []).append(record)
        complete = [
            r for recs in by_sentence.values()
            if len(recs) == ANNOTATORS_PER_SENTENCE for r in recs
        ]
        pending = sum(
            1 for recs in by_sentence.values()
            if len(recs) != ANNOTATORS_PER_SENTENCE
        )
        report = agreement_stats(complete,
                                 panel_size=ANNOTATORS_PER_SENTENCE)
        return report, pending

    def export_round(self, round_id):
        """annotations.jsonl content, ordered by (sentence_id,
        annotator_id); inverse of corpus ingest on the record set."""
        self._round_row(round_id)
        lines = [json.dumps(r.to_json(), ensure_ascii=False)
                 for r in self._records(round_id)]
        return "".join(line + "\n" for line in lines)


def category_descriptors():
    return [
        {
            "name": c.value,
            "display_name": c.display_name,
            "dimension": c.dimension.value,
            "description": c.description,
        }
        for c in CATEGORIES
    ]


def create_app(store=None, sentences=None):
    """FastAPI application over a RoundStore.

    `sentences` is the sampling population for new rounds; rounds can
    also be created directly on the store.
    """
    from fastapi import FastAPI, HTTPException, Request
    from fastapi.responses import PlainTextResponse

    app = FastAPI(title="reviewlens annotation service")
    app.state.store = store or RoundStore()
    app.state.sentences = list(sentences or [])

    def _store():
        return app.state.store

    @app.post("/api/v1/rounds", status_code=201)
    async def post_round(request: Request):
        body = await request.json()
        try:
            spec = SamplingSpec(
                mode=SamplingMode(body["spec"]["mode"]),
                n_total=body["spec"].get("n_total"),
                n_per_box=body["spec"].get("n_per_box"),
                seed=int(body["spec"].get("seed", 42)),
            )
            info = _store().create_round(
                body["round_id"], app.state.sentences, spec, body["panel"]
            )
        except PanelTooSmall as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (KeyError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return info.to_json()

    @app.get("/api/v1/rounds/{round_id}")
    def get_round(round_id: str):
        try:
            return _store().progress(round_id)
        except UnknownRound:
            raise HTTPException(status_code=404, detail=round_id)

    @app.get("/api/v1/rounds/{round_id}/assignments")
    def get_assignments(round_id: str, annotator: str, n: int = 20):
        try:
            sentences = _store().next_assignments(round_id, annotator, n)
        except UnknownRound:
            raise HTTPException(status_code=404, detail=round_id)
        except NotInPanel as exc:
            raise HTTPException(status_code=403, detail=str(exc))
        return {
            "sentences": [s.to_json() for s in sentences],
            "categories": category_descriptors(),
        }

    @app.post("/api/v1/rounds/{round_id}/annotations", status_code=201)
    async def post_annotation(round_id: str, request: Request):
        body = await request.json()
        body["round_id"] = round_id
        try:
            record = AnnotationRecord.from_json(body)
        except GatingViolation as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        except (MalformedRecord, KeyError, ValueError) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        try:
            _store().submit_annotation(record)
        except UnknownRound:
            raise HTTPException(status_code=404, detail=round_id)
        except DuplicateSubmission as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        except (NotAssigned, RoundClosed) as exc:
            raise HTTPException(status_code=422, detail=str(exc))
        return {"accepted": True}

    @app.get("/api/v1/rounds/{round_id}/agreement")
    def get_agreement(round_id: str):
        try:
            report, pending = _store().round_agreement(round_id)
        except UnknownRound:
            raise HTTPException(status_code=404, detail=round_id)
        return {**report.to_json(), "pending_sentences": pending}

    @app.get("/api/v1/rounds/{round_id}/export")
    def get_export(round_id: str):
        try:
            content = _store().export_round(round_id)
        except UnknownRound:
            raise HTTPException(status_code=404, detail=round_id)
        return PlainTextResponse(content, media_type="application/jsonl")

    @app.get("/api/v1/categories")
    def get_categories():
        return category_descriptors()

    return app


def serve(app, bind_addr=None):
    import uvicorn

    addr = bind_addr or os.environ.get(BIND_ADDR_ENV, "127.0.0.1:8000")
    host, _, port = addr.rpartition(":")
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port))
