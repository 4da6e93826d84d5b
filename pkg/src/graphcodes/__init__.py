"""Codes on graphs: Floquet matching codes, toric codes on 2-complexes, decoding with vacancies."""
