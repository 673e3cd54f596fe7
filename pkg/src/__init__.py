"""QGS central-extension laboratory"""
