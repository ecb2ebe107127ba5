from __future__ import annotations

import logging
from pathlib import Path
from typing import Any
from uuid import uuid4

from fastapi import FastAPI, File, Form, HTTPException, Query, Request, UploadFile
from fastapi.responses import HTMLResponse
from fastapi.templating import Jinja2Templates

from addercap.cli import (
    belokopytov_payload,
    constants_payload,
    fixed_point_payload,
    gtest_exact_payload,
    lagrangian_bound_payload,
    parse_mixture,
    to_jsonable,
)
from addercap.capacity import constraint_gap
from addercap.coding import is_uniquely_decodable, load_code
from addercap.constants import CONSTANTS, MAX_EXACT_T_N, MAX_GRID_PER_AXIS
from addercap.errors import AdderCapError, ResourceLimitError
from addercap.events import log_event, log_exception

_LOGGER = logging.getLogger("addercap.web")
_DEFAULT_GRID = 100
_MAX_UPLOAD_BYTES = 1 << 20


def _validate_upload_metadata(file: UploadFile | None) -> tuple[str | None, str | None]:
    if file is None or not file.filename:
        return None, "Upload a code JSON file to continue."

    source_name = Path(file.filename).name
    if Path(source_name).suffix.lower() != ".json":
        return None, "Only .json uploads are supported."

    return source_name, None


def create_app(
    default_grid: int = _DEFAULT_GRID,
    max_group_testing_n: int = MAX_EXACT_T_N,
) -> FastAPI:
    if not 2 <= default_grid <= MAX_GRID_PER_AXIS:
        raise ValueError(f"default_grid must be in [2, {MAX_GRID_PER_AXIS}], got {default_grid}")
    app = FastAPI(title="addercap", version="0.1.0")

    base_dir = Path(__file__).resolve().parent
    templates = Jinja2Templates(directory=str(base_dir / "templates"))
    app.state.default_grid = default_grid
    app.state.max_group_testing_n = max_group_testing_n
    app.state.templates = templates

    def report_context() -> dict[str, Any]:
        try:
            certificate = to_jsonable(belokopytov_payload())
            certificate_error = None
        except AdderCapError as exc:
            certificate, certificate_error = None, str(exc)
        return {
            "constants": to_jsonable(constants_payload()),
            "certificate": certificate,
            "certificate_error": certificate_error,
            "bound": to_jsonable(lagrangian_bound_payload()),
        }

    def render_index(
        request: Request,
        *,
        result: dict[str, Any] | None = None,
        form_values: dict[str, Any] | None = None,
        status_code: int = 200,
    ) -> HTMLResponse:
        form = {"p": "1", "a": "0.5", "b": "0.5"}
        if form_values:
            form.update(form_values)

        return templates.TemplateResponse(
            request=request,
            name="index.html",
            context={**report_context(), "result": result, "form": form},
            status_code=status_code,
        )

    @app.get("/health")
    def health() -> dict[str, str]:
        return {"status": "ok"}

    @app.get("/", response_class=HTMLResponse)
    def index(request: Request) -> HTMLResponse:
        return render_index(request)

    @app.post("/fixed-point", response_class=HTMLResponse)
    def fixed_point(
        request: Request,
        p: str = Form(""),
        a: str = Form(...),
        b: str = Form(...),
    ) -> HTMLResponse:
        request_id = uuid4().hex
        form_values = {"p": p, "a": a, "b": b}
        log_event(_LOGGER, logging.INFO, "web.request.received", request_id=request_id, route="fixed-point", **form_values)
        try:
            mix = parse_mixture(p.strip() or None, a, b)
            payload = to_jsonable(fixed_point_payload(mix))
        except AdderCapError as exc:
            log_event(_LOGGER, logging.WARNING, "web.request.failed", request_id=request_id, code=exc.code, error=str(exc))
            return render_index(
                request,
                result={"status": "error", "kind": "fixed_point", "message": str(exc)},
                form_values=form_values,
                status_code=400,
            )

        log_event(_LOGGER, logging.INFO, "web.request.succeeded", request_id=request_id, x_star=payload["x_star"])
        return render_index(
            request,
            result={"status": "ok", "kind": "fixed_point", "payload": payload},
            form_values=form_values,
        )

    @app.post("/code/check", response_class=HTMLResponse)
    async def code_check(request: Request, file: UploadFile | None = File(default=None)) -> HTMLResponse:
        request_id = uuid4().hex
        log_event(
            _LOGGER,
            logging.INFO,
            "web.request.received",
            request_id=request_id,
            route="code/check",
            has_upload=file is not None and bool(file.filename),
        )
        source_name, upload_error = _validate_upload_metadata(file)
        if upload_error is not None or file is None:
            log_event(_LOGGER, logging.WARNING, "web.request.failed", request_id=request_id, error=upload_error)
            return render_index(
                request,
                result={"status": "error", "kind": "code", "message": upload_error},
                status_code=400,
            )

        raw = await file.read(_MAX_UPLOAD_BYTES + 1)
        if len(raw) > _MAX_UPLOAD_BYTES:
            message = f"upload must be at most {_MAX_UPLOAD_BYTES} bytes"
            log_event(_LOGGER, logging.WARNING, "web.request.failed", request_id=request_id, error=message)
            return render_index(request, result={"status": "error", "kind": "code", "message": message}, status_code=400)

        try:
            code = load_code(raw.decode("utf-8", errors="replace"))
            verdict = is_uniquely_decodable(code)
        except AdderCapError as exc:
            log_event(_LOGGER, logging.WARNING, "web.request.failed", request_id=request_id, code=exc.code, error=str(exc))
            return render_index(
                request,
                result={"status": "error", "kind": "code", "message": str(exc)},
                status_code=400,
            )
        except Exception:
            log_exception(_LOGGER, "web.request.unexpected_error", request_id=request_id)
            raise

        log_event(
            _LOGGER,
            logging.INFO,
            "web.request.succeeded",
            request_id=request_id,
            source_name=source_name,
            decodable=verdict.decodable,
        )
        return render_index(
            request,
            result={
                "status": "ok",
                "kind": "code",
                "source_name": source_name,
                "payload": {"m1": code.m1, "m2": code.m2, "n_uses": code.n_uses, **to_jsonable(verdict)},
            },
        )

    def api_call(route: str, build: Any, **fields: Any) -> Any:
        request_id = uuid4().hex
        log_event(_LOGGER, logging.INFO, "web.request.received", request_id=request_id, route=route, **fields)
        try:
            payload = to_jsonable(build())
        except AdderCapError as exc:
            log_event(_LOGGER, logging.WARNING, "web.request.failed", request_id=request_id, code=exc.code, error=str(exc))
            raise HTTPException(status_code=400, detail=exc.to_payload()) from exc
        log_event(_LOGGER, logging.INFO, "web.request.succeeded", request_id=request_id, route=route)
        return payload

    @app.get("/api/constants")
    def api_constants() -> dict[str, Any]:
        return api_call("api/constants", constants_payload)

    @app.get("/api/capacity/belokopytov")
    def api_belokopytov() -> dict[str, Any]:
        return api_call("api/capacity/belokopytov", belokopytov_payload)

    @app.get("/api/lagrangian/bound")
    def api_lagrangian_bound(lam: float = Query(CONSTANTS.lambda_star)) -> dict[str, Any]:
        return api_call("api/lagrangian/bound", lambda: lagrangian_bound_payload(lam), lam=lam)

    @app.get("/api/gtest/exact")
    def api_gtest_exact(n: int = Query(...), variant: str = Query("single_set")) -> dict[str, Any]:
        def build() -> dict[str, Any]:
            if n > app.state.max_group_testing_n:
                raise ResourceLimitError(f"n must be <= {app.state.max_group_testing_n} for this service, got {n}")
            return gtest_exact_payload(n, variant)

        return api_call("api/gtest/exact", build, n=n, variant=variant)

    @app.get("/api/feasibility")
    def api_feasibility(
        a: str = Query(...),
        b: str = Query(...),
        p: str | None = Query(None),
        grid: int | None = Query(None),
    ) -> dict[str, Any]:
        def build() -> dict[str, Any]:
            mix = parse_mixture(p, a, b)
            report = constraint_gap(mix, grid_per_axis=app.state.default_grid if grid is None else grid)
            return {"mixture": mix.to_payload(), **to_jsonable(report)}

        return api_call("api/feasibility", build, a=a, b=b, p=p, grid=grid)

    return app


app = create_app()
