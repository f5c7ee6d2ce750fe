public class Broken {
    public static void oops(int a {
        int x = a +;
    }
