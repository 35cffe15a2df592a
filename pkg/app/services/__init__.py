"""
Сервисы приложения.

Алгоритмы стадий I и II, базовый ADMM, целевые функции агентов
и оркестрация экспериментов.
"""
