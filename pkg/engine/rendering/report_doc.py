"""Summary Report Renderer.

Produces the run summary in DOCX and plain-text formats:

    AUC grid          task x model rows, one column per intervention
    Class proportions one row per intervention
    Topic words       top words of the topics whose occlusion hurt most

Usage::

    from engine.rendering.report_doc import ReportContent, ReportRenderer

    content = ReportContent(title="demo", config_hash=h, auc_table=grid)
    renderer = ReportRenderer()

    text = renderer.render_text(content)
    docx_bytes = renderer.render_docx(content)
"""

from __future__ import annotations

import io
import zipfile
from dataclasses import dataclass, field
from datetime import datetime
from typing import List, Optional, Sequence, Tuple

import pandas as pd
from docx import Document
from docx.enum.text import WD_ALIGN_PARAGRAPH
from docx.oxml import OxmlElement
from docx.oxml.ns import qn
from docx.shared import Inches, Pt, RGBColor

from . import styles

_EMPTY_CELL = "-"


@dataclass(frozen=True)
class TopicWords:
    """One important topic: its occlusion delta and most probable words."""

    topic: str
    delta_auc: Optional[float]
    words: Tuple[str, ...]


@dataclass
class ReportContent:
    """Everything the report shows; built by the report stage from CSV artifacts.

    Attributes:
        title: Run name shown in the heading
        config_hash: Hash of the RunConfig that produced the report
        auc_table: Output of ``format_auc_table`` (task, model, interventions...)
        proportions: Output of ``proportions_frame``
        topic_words: Topics ranked by occlusion, with their top words
        notes: Free-form remarks (partial evaluations, skipped sections)
        figures: File names of the SVG figures written next to the report
    """

    title: str
    config_hash: str
    auc_table: pd.DataFrame = field(default_factory=pd.DataFrame)
    proportions: pd.DataFrame = field(default_factory=pd.DataFrame)
    topic_words: List[TopicWords] = field(default_factory=list)
    notes: List[str] = field(default_factory=list)
    figures: List[str] = field(default_factory=list)


# ---------------------------------------------------------------------------
# Internal helpers
# ---------------------------------------------------------------------------

def _best_cells(table: pd.DataFrame) -> set:
    """(row, column) positions holding the best AUC of each task per intervention."""
    best = set()
    value_columns = [c for c in table.columns if c not in ("task", "model")]
    for _, rows in table.groupby("task", sort=False):
        for col_index, column in enumerate(value_columns, start=2):
            numeric = pd.to_numeric(rows[column], errors="coerce")
            if numeric.notna().any():
                top = numeric.max()
                for row_index in numeric.index[numeric == top]:
                    best.add((row_index, col_index))
    return best


def _topic_rows(topics: Sequence[TopicWords]) -> pd.DataFrame:
    return pd.DataFrame(
        [
            {
                "Topic": t.topic,
                "AUC drop": _EMPTY_CELL if t.delta_auc is None else f"{t.delta_auc:.3f}",
                "Top words": ", ".join(t.words),
            }
            for t in topics
        ],
        columns=["Topic", "AUC drop", "Top words"],
    )


def _normalize_zip(payload: bytes) -> bytes:
    """Rewrite the DOCX archive with fixed entry timestamps."""
    source = zipfile.ZipFile(io.BytesIO(payload))
    buf = io.BytesIO()
    with zipfile.ZipFile(buf, "w", zipfile.ZIP_DEFLATED) as target:
        for info in source.infolist():
            entry = zipfile.ZipInfo(info.filename, date_time=styles.ZIP_FIXED_DATE)
            entry.compress_type = zipfile.ZIP_DEFLATED
            entry.external_attr = 0o600 << 16
            target.writestr(entry, source.read(info.filename))
    return buf.getvalue()


# ---------------------------------------------------------------------------
# DOCX renderer
# ---------------------------------------------------------------------------

def _shade_cell(cell, fill_hex: str) -> None:
    """Apply background fill colour to a python-docx table cell."""
    tc = cell._tc
    tcPr = tc.get_or_add_tcPr()
    for existing in tcPr.findall(qn("w:shd")):
        tcPr.remove(existing)
    shd = OxmlElement("w:shd")
    shd.set(qn("w:val"), "clear")
    shd.set(qn("w:color"), "auto")
    shd.set(qn("w:fill"), fill_hex)
    tcPr.append(shd)


def _set_col_widths(table, col_widths_inches: Tuple[float, ...]) -> None:
    """Set absolute column widths on a python-docx table."""
    for row in table.rows:
        for i, cell in enumerate(row.cells):
            if i < len(col_widths_inches):
                cell.width = Inches(col_widths_inches[i])


def _heading(doc, text: str) -> None:
    para = doc.add_paragraph()
    run = para.add_run(text)
    run.bold = True
    run.font.size = Pt(styles.DOCX_HEADING_SIZE)
    run.font.color.rgb = RGBColor.from_string(styles.HEADER_BG_HEX)


def _render_docx_table(doc, frame: pd.DataFrame, best: Optional[set] = None, band_column: Optional[str] = None) -> None:
    """Add ``frame`` as a grid table with a shaded header row."""
    best = best or set()
    table = doc.add_table(rows=1 + len(frame), cols=len(frame.columns))
    table.style = "Table Grid"

    for cell, label in zip(table.rows[0].cells, frame.columns):
        _shade_cell(cell, styles.HEADER_BG_HEX)
        run = cell.paragraphs[0].add_run(str(label))
        run.bold = True
        run.font.color.rgb = RGBColor.from_string(styles.HEADER_FG_HEX)
        run.font.size = Pt(styles.DOCX_TABLE_SIZE)

    band = 0
    previous = None
    for row_number, (index, record) in enumerate(frame.iterrows(), start=1):
        if band_column is not None:
            if previous is not None and record[band_column] != previous:
                band += 1
            previous = record[band_column]
        cells = table.rows[row_number].cells
        for col_index, value in enumerate(record):
            if band % 2:
                _shade_cell(cells[col_index], styles.BAND_BG_HEX)
            para = cells[col_index].paragraphs[0]
            if col_index >= 2 and band_column is not None:
                para.alignment = WD_ALIGN_PARAGRAPH.CENTER
            run = para.add_run(str(value))
            run.font.size = Pt(styles.DOCX_TABLE_SIZE)
            if (index, col_index) in best:
                run.bold = True
                run.font.color.rgb = RGBColor.from_string(styles.BEST_MARK_HEX)

    width = styles.DOCX_PAGE_WIDTH / max(len(frame.columns), 1)
    _set_col_widths(table, tuple(width for _ in frame.columns))
    doc.add_paragraph()


# ---------------------------------------------------------------------------
# Public renderer class
# ---------------------------------------------------------------------------

class ReportRenderer:
    """Render the run summary.

    Accepts a :class:`ReportContent` and produces:
    - A DOCX file (bytes) with the AUC grid, class proportions and topic words
    - A plain-text version of the same tables

    Empty sections are replaced by a one-line note. Identical content
    renders to identical bytes.
    """

    def render_docx(self, content: ReportContent) -> bytes:
        """Return DOCX bytes for the summary report."""
        doc = Document()

        for section in doc.sections:
            section.top_margin = Inches(styles.DOCX_MARGIN_TOP)
            section.bottom_margin = Inches(styles.DOCX_MARGIN_BOTTOM)
            section.left_margin = Inches(styles.DOCX_MARGIN_LEFT)
            section.right_margin = Inches(styles.DOCX_MARGIN_RIGHT)

        fixed = datetime(styles.DOCX_FIXED_YEAR, 1, 1)
        props = doc.core_properties
        props.author = styles.DOCX_AUTHOR
        props.last_modified_by = styles.DOCX_AUTHOR
        props.created = fixed
        props.modified = fixed
        props.revision = 1
        props.title = content.title

        title_para = doc.add_paragraph()
        title_run = title_para.add_run(f"{content.title} - Intervention Prediction Summary")
        title_run.bold = True
        title_run.font.size = Pt(styles.DOCX_TITLE_SIZE)
        title_run.font.color.rgb = RGBColor.from_string(styles.HEADER_BG_HEX)

        subtitle = doc.add_paragraph(f"Config hash: {content.config_hash}")
        subtitle.runs[0].font.size = Pt(styles.DOCX_TABLE_SIZE + 1)

        _heading(doc, "Test-set AUC by task and model")
        if content.auc_table.empty:
            doc.add_paragraph("No evaluation metrics found. Run the evaluate stage first.")
        else:
            table = content.auc_table.reset_index(drop=True)
            _render_docx_table(doc, table, best=_best_cells(table), band_column="task")

        _heading(doc, "Class proportions of windowed examples")
        if content.proportions.empty:
            doc.add_paragraph("No windowed examples found. Run the window stage first.")
        else:
            _render_docx_table(doc, content.proportions.reset_index(drop=True))

        if content.topic_words:
            _heading(doc, "Most important topics by occlusion")
            _render_docx_table(doc, _topic_rows(content.topic_words))

        if content.figures:
            _heading(doc, "Figures")
            for name in content.figures:
                doc.add_paragraph(name, style="List Bullet")

        if content.notes:
            _heading(doc, "Notes")
            for note in content.notes:
                doc.add_paragraph(note, style="List Bullet")

        buf = io.BytesIO()
        doc.save(buf)
        return _normalize_zip(buf.getvalue())

    def render_text(self, content: ReportContent) -> str:
        """Return the same summary as plain text."""
        lines = []
        lines.append("=" * 60)
        lines.append(f"{content.title} - Intervention Prediction Summary")
        lines.append("=" * 60)
        lines.append(f"Config hash: {content.config_hash}")
        lines.append("")

        lines.append("TEST-SET AUC:")
        lines.append("-" * 60)
        if content.auc_table.empty:
            lines.append("(no evaluation metrics)")
        else:
            lines.append(content.auc_table.to_string(index=False))
        lines.append("")

        lines.append("CLASS PROPORTIONS:")
        lines.append("-" * 60)
        if content.proportions.empty:
            lines.append("(no windowed examples)")
        else:
            lines.append(content.proportions.to_string(index=False))
        lines.append("")

        if content.topic_words:
            lines.append("MOST IMPORTANT TOPICS:")
            lines.append("-" * 60)
            lines.append(_topic_rows(content.topic_words).to_string(index=False))
            lines.append("")

        if content.figures:
            lines.append("FIGURES:")
            lines.append("-" * 60)
            for i, name in enumerate(content.figures, 1):
                lines.append(f"{i}. {name}")
            lines.append("")

        if content.notes:
            lines.append("NOTES:")
            lines.append("-" * 60)
            for i, note in enumerate(content.notes, 1):
                lines.append(f"{i}. {note}")
            lines.append("")

        return "\n".join(lines)
