"""
Пакет тестов для implicit_pf.
"""
