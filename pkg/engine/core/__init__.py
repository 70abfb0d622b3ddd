"""Core stay model: variables, PatientStay, cohort file I/O."""
