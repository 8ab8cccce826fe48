from .density_checks import non_fhc_certificate, non_ufhc_certificate
from .family import build_v_sequence, family_certificate, find_delta_r, gamma_rm, lambda_r, resolve_level
from .returns import return_set, s_density_report, schedule_S
from .visit import ClaimReport, VisitQuery, certified_visits, visit_certificate, visit_thresholds

__all__ = [
    "ClaimReport",
    "VisitQuery",
    "build_v_sequence",
    "certified_visits",
    "family_certificate",
    "find_delta_r",
    "gamma_rm",
    "lambda_r",
    "non_fhc_certificate",
    "non_ufhc_certificate",
    "resolve_level",
    "return_set",
    "s_density_report",
    "schedule_S",
    "visit_certificate",
    "visit_thresholds",
]
