import json
import logging
import os
from pathlib import Path
from typing import Any, Dict, List, Optional

import pandas as pd
from openpyxl import Workbook
from openpyxl.styles import Alignment, Font, PatternFill

from src.models.report import FAIL, Report, ReportEntry

logger = logging.getLogger(__name__)

CSV_COLUMNS = [
    'check', 'location', 'verdict',
    'lhs_re', 'lhs_im', 'rhs_re', 'rhs_im', 'residual',
    'parameter_re', 'parameter_im', 'detail',
]
SUMMARY_FAILURE_LIMIT = 20


def _split_number(value) -> tuple:
    """(re, im) d'une valeur numérique, (None, None) sinon"""
    if isinstance(value, bool):
        return float(value), 0.0
    if isinstance(value, (int, float, complex)) or hasattr(value, 'real'):
        try:
            number = complex(value)
        except (TypeError, ValueError):
            return None, None
        return number.real, number.imag
    return None, None


def entry_row(entry: ReportEntry) -> Dict[str, Any]:
    lhs_re, lhs_im = _split_number(entry.lhs)
    rhs_re, rhs_im = _split_number(entry.rhs)
    parameter_re, parameter_im = _split_number(entry.parameter)
    return {
        'check': entry.check,
        'location': entry.location,
        'verdict': entry.verdict,
        'lhs_re': lhs_re,
        'lhs_im': lhs_im,
        'rhs_re': rhs_re,
        'rhs_im': rhs_im,
        'residual': entry.residual,
        'parameter_re': parameter_re,
        'parameter_im': parameter_im,
        'detail': entry.detail or '',
    }


class ReportGenerator:
    """Écriture des rapports de vérification (JSON, CSV, Markdown, Excel optionnel)"""

    def __init__(self, output_dir: str = None):
        if output_dir is None:
            project_root = Path(__file__).parent.parent.parent.resolve()
            self.output_dir = os.path.join(project_root, "reports")
        else:
            self.output_dir = output_dir

    def entries_frame(self, report: Report) -> pd.DataFrame:
        return pd.DataFrame([entry_row(e) for e in report.entries], columns=CSV_COLUMNS)

    def write(self, report: Report, export_xlsx: bool = False) -> Dict[str, str]:
        """
        Écrit report.json, report.csv et summary.md (et report.xlsx si demandé)

        Args:
            report (Report): rapport assemblé
            export_xlsx (bool): export Excel en plus des fichiers déterministes

        Returns:
            Dict[str, str]: chemins des fichiers écrits
        """
        os.makedirs(self.output_dir, exist_ok=True)
        paths = {
            'json': os.path.join(self.output_dir, 'report.json'),
            'csv': os.path.join(self.output_dir, 'report.csv'),
            'summary': os.path.join(self.output_dir, 'summary.md'),
        }

        with open(paths['json'], 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(json.dumps(report.to_dict(), sort_keys=True, indent=2, ensure_ascii=False))
            handle.write('\n')

        self.entries_frame(report).to_csv(paths['csv'], float_format='%.17g', index=False, lineterminator='\n')

        with open(paths['summary'], 'w', encoding='utf-8', newline='\n') as handle:
            handle.write(self.render_summary(report))

        if export_xlsx:
            paths['xlsx'] = self.generate_excel_report(report)

        logger.info(f"✅ Rapport écrit dans {self.output_dir} (verdict {report.verdict})")
        return paths

    def render_summary(self, report: Report) -> str:
        """Résumé Markdown: verdict, compteurs, résidu maximal par vérification, échecs"""
        name = report.scenario.get('name', 'scénario')
        counts = report.counts()
        lines = [
            f"# Rapport toposkms: {name}",
            "",
            f"Verdict: **{report.verdict.upper()}**",
            "",
            f"- pass: {counts.get('pass', 0)}",
            f"- fail: {counts.get('fail', 0)}",
            f"- info: {counts.get('info', 0)}",
            f"- skip: {counts.get('skip', 0)}",
            "",
            "| Vérification | Entrées | Échecs | Résidu max |",
            "|---|---|---|---|",
        ]
        for check in report.checks():
            entries = [e for e in report.entries if e.check == check]
            failures = sum(1 for e in entries if e.verdict == FAIL)
            worst = report.max_residual(check)
            worst_text = f"{worst:.3e}" if worst is not None else "-"
            lines.append(f"| {check} | {len(entries)} | {failures} | {worst_text} |")

        failures = report.failures()
        if failures:
            lines += ["", "## Échecs", ""]
            for entry in failures[:SUMMARY_FAILURE_LIMIT]:
                parameter = f" t={entry.parameter}" if entry.parameter is not None else ""
                lines.append(f"- `{entry.check}` @ {entry.location}{parameter}: résidu {entry.residual}")
            if len(failures) > SUMMARY_FAILURE_LIMIT:
                lines.append(f"- … {len(failures) - SUMMARY_FAILURE_LIMIT} autres")
        lines.append("")
        return '\n'.join(lines)

    def generate_excel_report(self, report: Report, filename: str = 'report.xlsx') -> str:
        """Classeur Excel: une feuille par famille de vérifications, en-tête stylé"""
        filepath = os.path.join(self.output_dir, filename)
        try:
            wb = Workbook()
            wb.remove(wb.active)

            header_font = Font(size=12, bold=True, color="FFFFFF")
            header_fill = PatternFill(start_color="366092", end_color="366092", fill_type="solid")
            fail_fill = PatternFill(start_color="F4CCCC", end_color="F4CCCC", fill_type="solid")

            families: Dict[str, List[ReportEntry]] = {}
            for entry in report.entries:
                families.setdefault(entry.check.split('.')[0], []).append(entry)

            ws_summary = wb.create_sheet("Résumé")
            ws_summary['A1'] = f"Rapport toposkms: {report.scenario.get('name', 'scénario')}"
            ws_summary['A1'].font = Font(size=16, bold=True)
            ws_summary['A3'] = "Verdict"
            ws_summary['B3'] = report.verdict
            ws_summary['A3'].font = Font(bold=True)
            for row, (key, value) in enumerate(sorted(report.counts().items()), start=4):
                ws_summary[f'A{row}'] = key
                ws_summary[f'B{row}'] = value

            for family, entries in sorted(families.items()):
                ws = wb.create_sheet(family[:31])
                for column, title in enumerate(CSV_COLUMNS, start=1):
                    cell = ws.cell(row=1, column=column, value=title)
                    cell.font = header_font
                    cell.fill = header_fill
                    cell.alignment = Alignment(horizontal='center')
                for row, entry in enumerate(entries, start=2):
                    values = entry_row(entry)
                    for column, title in enumerate(CSV_COLUMNS, start=1):
                        cell = ws.cell(row=row, column=column, value=values[title])
                        if entry.verdict == FAIL:
                            cell.fill = fail_fill
                ws.column_dimensions['A'].width = 32
                ws.column_dimensions['B'].width = 40

            wb.save(filepath)
            logger.info(f"Fichier Excel généré: {filepath}")
            return filepath
        except Exception as e:
            logger.error(f"Erreur génération Excel: {str(e)}")
            raise


def load_report(path: str) -> Optional[dict]:
    """Relit un report.json (None si absent)"""
    if not os.path.exists(path):
        return None
    with open(path, encoding='utf-8') as handle:
        return json.load(handle)
