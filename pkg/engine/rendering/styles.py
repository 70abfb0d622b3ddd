"""Default styling for reports and plots.

DOCX and SVG styling constants for consistent formatting across all report outputs.
"""

# DOCX Font Settings
DOCX_FONT_FAMILY = 'Calibri'
DOCX_TITLE_SIZE = 15  # points
DOCX_HEADING_SIZE = 12  # points
DOCX_BODY_SIZE = 11  # points
DOCX_TABLE_SIZE = 9  # points (AUC grid cells)

# DOCX Margins (in inches)
DOCX_MARGIN_TOP = 0.75
DOCX_MARGIN_BOTTOM = 0.75
DOCX_MARGIN_LEFT = 0.75
DOCX_MARGIN_RIGHT = 0.75

# Usable page width in inches (Letter paper minus margins)
DOCX_PAGE_WIDTH = 7.0

# Table colours
HEADER_BG_HEX = "1F3864"        # dark blue, header row background
HEADER_FG_HEX = "FFFFFF"        # white, header row text
BAND_BG_HEX = "EEF2F8"          # pale blue, alternate task bands
BEST_MARK_HEX = "006600"        # dark green, best model per task/intervention

# Fixed document metadata; saved reports carry no wall-clock time
DOCX_AUTHOR = "ICUForge"
DOCX_FIXED_YEAR = 2000
ZIP_FIXED_DATE = (1980, 1, 1, 0, 0, 0)

# SVG plot settings
SVG_HASH_SALT = "icuforge"
PLOT_FONT_SIZE = 9
OCCLUSION_TOP_N = 8
TRAJECTORY_FEATURES = 4
HALLUCINATION_FEATURES = 8

# One colour per feature group in occlusion plots
GROUP_COLORS = {
    "vitals_labs": "#1F3864",
    "topics": "#C55A11",
    "statics": "#548235",
    "intervention": "#7F7F7F",
    "time": "#7030A0",
}
POLARITY_COLORS = {
    "top": "#C00000",
    "bottom": "#2E75B6",
}

# Topic words listed per important topic in the report
REPORT_TOPIC_WORDS = 10
REPORT_TOPICS = 5
