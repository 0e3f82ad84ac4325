"""HTTP API over the study service.

Endpoints: POST /sessions, GET /sessions/{id}/next,
POST /sessions/{id}/ratings, GET /export/ratings, GET /export/matrices
(admin-authenticated via the X-Admin-Token header), GET /healthz.
Media are passed through as URIs; nothing is transcoded or proxied.
"""

from __future__ import annotations

import io

from fastapi import FastAPI, Header, HTTPException
from fastapi.responses import PlainTextResponse
from pydantic import BaseModel

from .model import RATINGS_HEADER
from .service import ServiceError, StudyComplete, StudyService


class SessionRequest(BaseModel):
    age_band: str
    gender: str = "prefer not to say"


class RatingRequest(BaseModel):
    unit_id: str
    scores: dict[str, int]
    submission_token: str
    view_count: int = 1


def create_app(service: StudyService, admin_token: str | None = None) -> FastAPI:
    app = FastAPI(title="cohesion-study rating service")

    def check_admin(token: str | None) -> None:
        if admin_token and token != admin_token:
            raise HTTPException(status_code=403, detail="admin token required")

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok", "units": len(service.units)}

    @app.post("/sessions")
    def open_session(req: SessionRequest) -> dict:
        try:
            return service.open_session(req.model_dump())
        except ServiceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/sessions/{session_id}/next")
    def next_unit(session_id: str) -> dict:
        try:
            return service.next_unit(session_id)
        except StudyComplete:
            raise HTTPException(status_code=410, detail="study complete")
        except ServiceError as exc:
            raise HTTPException(status_code=404, detail=str(exc))

    @app.post("/sessions/{session_id}/ratings")
    def submit_rating(session_id: str, req: RatingRequest) -> dict:
        try:
            return service.submit_rating(
                session_id, req.unit_id, req.scores, req.submission_token
            )
        except ServiceError as exc:
            raise HTTPException(status_code=422, detail=str(exc))

    @app.get("/export/ratings", response_class=PlainTextResponse)
    def export_ratings(x_admin_token: str | None = Header(default=None)) -> str:
        check_admin(x_admin_token)
        service.apply_validity_filter()
        buf = io.StringIO()
        buf.write(",".join(RATINGS_HEADER) + "\n")
        for r in service.all_ratings():
            for item_id in sorted(r.scores):
                buf.write(
                    f"{r.rater_id},{r.unit_id},{item_id},{r.scores[item_id]},"
                    f"{int(r.valid)},{r.submitted_at:.3f}\n"
                )
        return buf.getvalue()

    @app.get("/export/matrices")
    def export_matrices(x_admin_token: str | None = Header(default=None)) -> dict:
        check_admin(x_admin_token)
        try:
            matrices = service.export_matrices()
        except ServiceError as exc:
            raise HTTPException(status_code=409, detail=str(exc))
        return {
            f"{technique}/{dimension}": {
                "targets": list(m.targets),
                "values": [list(row) for row in m.values],
                "dimension": m.dimension,
            }
            for (technique, dimension), m in sorted(matrices.items())
        }

    return app
