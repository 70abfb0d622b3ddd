"""Report rendering: SVG figures and the DOCX summary."""
