# Reflector coverage simulator modules package
